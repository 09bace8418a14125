//! Constructive decompositions of laws on `{0, 1, 2, ...}`.
//!
//! * Kaluza sequence to renewal increments (`u_n = sum f_k u_{n-k}`).
//! * Log-convex pmf to compound geometric form (`p_n = sum h_k p_{n-k}`).
//! * Any pmf with `p_0 > 0` to its canonical coefficients `q_x` in
//!   `log P(s) = -lambda + sum_x q_x s^x`; the law is infinitely divisible iff all
//!   `q_x >= 0`, so a negative coefficient refutes and a nonnegative prefix is a
//!   truncation-bounded certificate.
//!
//! Truncated inputs keep their `mass_deficit`; nothing is renormalized. The
//! recursions only look at `p_0..p_n` to produce order `n`, so they are exact on
//! the retained prefix.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::seq::NonnegSeq;
use crate::series;

/// Default refutation threshold for canonical coefficients.
pub const REFUTE_TOL: f64 = 1e-9;

const MASS_TOL: f64 = 1e-12;

/// Probability mass function on `{0, 1, ...}` truncated after `probs.len()` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr")]
pub struct LatticePmf {
    pub probs: Vec<f64>,
    pub mass_deficit: f64,
}

#[derive(Deserialize)]
struct PmfRepr {
    probs: Vec<f64>,
    #[serde(default)]
    mass_deficit: f64,
}

impl TryFrom<PmfRepr> for LatticePmf {
    type Error = Error;

    fn try_from(r: PmfRepr) -> Result<Self> {
        LatticePmf::new(r.probs, r.mass_deficit)
    }
}

impl LatticePmf {
    pub fn new(probs: Vec<f64>, mass_deficit: f64) -> Result<Self> {
        if probs.is_empty() {
            return input("pmf needs at least one point");
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return input(format!("probability at {i} is {p}"));
        }
        if !(mass_deficit.is_finite() && mass_deficit >= 0.0) {
            return input(format!(
                "mass deficit must be nonnegative, got {mass_deficit}"
            ));
        }
        let total: f64 = probs.iter().sum::<f64>() + mass_deficit;
        if (total - 1.0).abs() > MASS_TOL {
            return input(format!("probabilities plus deficit sum to {total}, not 1"));
        }
        Ok(Self {
            probs,
            mass_deficit,
        })
    }

    /// Normalizes nonnegative weights into a pmf with no deficit.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return input("weights must have a positive finite sum");
        }
        Self::new(weights.iter().map(|w| w / total).collect(), 0.0)
    }

    /// Geometric law `(1 - rho) rho^x` kept up to `len` points.
    pub fn geometric(rho: f64, len: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) || len == 0 {
            return input(format!(
                "geometric law needs rho in [0, 1) and len >= 1, got {rho}, {len}"
            ));
        }
        let probs = (0..len).map(|x| (1.0 - rho) * rho.powi(x as i32)).collect();
        Self::new(probs, rho.powi(len as i32))
    }

    /// Poisson law with mean `lambda` kept up to `len` points.
    pub fn poisson(lambda: f64, len: usize) -> Result<Self> {
        if !(lambda >= 0.0) || len == 0 {
            return input("Poisson law needs lambda >= 0 and len >= 1");
        }
        let mut probs = Vec::with_capacity(len);
        let mut p = (-lambda).exp();
        for x in 0..len {
            probs.push(p);
            p *= lambda / (x + 1) as f64;
        }
        let deficit = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Self::new(probs, deficit)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn leading(&self) -> Result<f64> {
        let p0 = self.probs[0];
        if p0 > 0.0 {
            Ok(p0)
        } else {
            Err(Error::Input(
                "decomposition needs positive mass at 0".into(),
            ))
        }
    }
}

/// Solves `u_n = sum_{k=1}^n f_k u_{n-k}` for `f_1, ..., f_{L-1}` (element `k-1` is `f_k`).
///
/// For a Kaluza sequence every `f_k` is nonnegative and they sum to at most one.
pub fn renewal_increments(u: &NonnegSeq) -> Result<Vec<f64>> {
    let v = u.as_slice();
    if (v[0] - 1.0).abs() > MASS_TOL {
        return input(format!("renewal sequence must start at 1, got {}", v[0]));
    }
    let mut f = Vec::with_capacity(v.len().saturating_sub(1));
    for n in 1..v.len() {
        let acc: f64 = (1..n).map(|k| f[k - 1] * v[n - k]).sum();
        f.push(v[n] - acc);
    }
    Ok(f)
}

/// `p_n = sum_{k=1}^n h_k p_{n-k}` with `p_0` given: the compound geometric form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundGeometricRep {
    pub p0: f64,
    /// Element `k-1` is `h_k`.
    pub jump_h: Vec<f64>,
    /// True when every `h_k >= -tol`.
    pub valid: bool,
    pub min_h: f64,
    pub tolerance_used: f64,
}

impl CompoundGeometricRep {
    /// Regenerates `p_0, ..., p_{len-1}` by the forward recursion.
    pub fn reconstruct(&self, len: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(len);
        if len == 0 {
            return p;
        }
        p.push(self.p0);
        for n in 1..len {
            let v: f64 = (1..=n.min(self.jump_h.len()))
                .map(|k| self.jump_h[k - 1] * p[n - k])
                .sum();
            p.push(v);
        }
        p
    }

    /// Total jump mass `sum h_k`; equals `1 - p0` for an untruncated law.
    pub fn jump_mass(&self) -> f64 {
        self.jump_h.iter().sum()
    }
}

pub fn compound_geometric(p: &LatticePmf, tol: f64) -> Result<CompoundGeometricRep> {
    let p0 = p.leading()?;
    let probs = &p.probs;
    let mut h: Vec<f64> = Vec::with_capacity(probs.len().saturating_sub(1));
    for n in 1..probs.len() {
        let acc: f64 = (1..n).map(|k| h[k - 1] * probs[n - k]).sum();
        h.push((probs[n] - acc) / p0);
    }
    let min_h = h.iter().copied().fold(f64::INFINITY, f64::min);
    let min_h = if min_h.is_finite() { min_h } else { 0.0 };
    Ok(CompoundGeometricRep {
        p0,
        valid: min_h >= -tol,
        min_h,
        jump_h: h,
        tolerance_used: tol,
    })
}

/// Canonical compound-Poisson coefficients of a lattice law.
///
/// `rate = -ln(mass at shift)`. `jump_q[x-1]` is `q_x` and `jump_q_neg[x-1]` is
/// `q_{-x}` for two-sided laws. For an infinitely divisible law `rate = sum q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyRep {
    pub shift: i64,
    pub rate: f64,
    pub jump_q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jump_q_neg: Vec<f64>,
}

impl LevyRep {
    /// Smallest coefficient and its signed position.
    pub fn min_coefficient(&self) -> Option<(i64, f64)> {
        let pos = self
            .jump_q
            .iter()
            .enumerate()
            .map(|(i, &q)| (i as i64 + 1, q));
        let neg = self
            .jump_q_neg
            .iter()
            .enumerate()
            .map(|(i, &q)| (-(i as i64) - 1, q));
        pos.chain(neg).min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// `n q_n = (n p_n - sum_{k=1}^{n-1} k q_k p_{n-k}) / p_0` for `n = 1..=n_max`.
pub fn levy_coeffs(p: &LatticePmf, n_max: usize) -> Result<LevyRep> {
    let p0 = p.leading()?;
    if n_max >= p.len() {
        return input(format!(
            "order {n_max} exceeds the truncation of a pmf with {} points",
            p.len()
        ));
    }
    let probs = &p.probs;
    let mut q = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let acc: f64 = (1..n).map(|k| k as f64 * q[k - 1] * probs[n - k]).sum();
        q.push((n as f64 * probs[n] - acc) / (n as f64 * p0));
    }
    Ok(LevyRep {
        shift: 0,
        rate: -p0.ln(),
        jump_q: q,
        jump_q_neg: Vec::new(),
    })
}

/// Log of the pmf's generating function, coefficients `0..=n_max`.
///
/// Second route to the canonical coefficients: series division and integration
/// instead of the weighted recursion in [`levy_coeffs`].
pub fn pgf_log(p: &LatticePmf, n_max: usize) -> Result<Vec<f64>> {
    p.leading()?;
    series::series_log(&p.probs, n_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

/// Truncation-bounded infinite-divisibility verdict for a law on `{0, 1, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdCertificate {
    pub verdict: Verdict,
    /// Smallest `x` with `q_x < -tol`.
    pub refuted_at: Option<i64>,
    /// Coefficients were checked for `1 <= x <= checked_up_to`.
    pub checked_up_to: usize,
    pub min_q: f64,
    pub tolerance_used: f64,
    pub levy: LevyRep,
}

pub fn certify_id_nonneg(p: &LatticePmf, n_max: usize, tol: f64) -> Result<IdCertificate> {
    let levy = levy_coeffs(p, n_max)?;
    Ok(certificate_from_levy(levy, n_max, tol))
}

pub(crate) fn certificate_from_levy(
    levy: LevyRep,
    checked_up_to: usize,
    tol: f64,
) -> IdCertificate {
    let coeffs: Vec<(i64, f64)> = levy
        .jump_q
        .iter()
        .enumerate()
        .map(|(i, &q)| (i as i64 + 1, q))
        .chain(
            levy.jump_q_neg
                .iter()
                .enumerate()
                .map(|(i, &q)| (-(i as i64) - 1, q)),
        )
        .collect();
    let min_q = coeffs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let refuted_at = coeffs
        .iter()
        .filter(|c| c.1 < -tol)
        .map(|c| c.0)
        .min_by_key(|x| (x.abs(), *x));
    let verdict = if coeffs.is_empty() || coeffs.iter().any(|c| !c.1.is_finite()) {
        Verdict::Inconclusive
    } else if refuted_at.is_some() {
        Verdict::Refuted
    } else {
        Verdict::Certified
    };
    IdCertificate {
        verdict,
        refuted_at,
        checked_up_to,
        min_q: if min_q.is_finite() { min_q } else { 0.0 },
        tolerance_used: tol,
        levy,
    }
}
