//! Log-convexity, Kaluza and complete-monotonicity tests for finite sequences,
//! the shift-mixing closure operation, and seeded generators for property tests.
//!
//! Every inequality is tested with a combined relative-plus-absolute slack:
//! `lhs <= rhs * (1 + tol) + tol`. The reported `margin` is the most negative
//! normalized slack `(rhs - lhs) / (1 + rhs)`, so `verdict == (margin >= -tol)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::seq::NonnegSeq;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Outcome of one sequence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: bool,
    /// Lattice labels `(x, x + y, x + 2y)` of the first failing triple.
    pub first_violation: Option<[i64; 3]>,
    pub margin: f64,
    pub tolerance_used: f64,
    /// Difference order at which a complete-monotonicity test failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    fn from_margin(margin: f64, tol: f64, first_violation: Option<[i64; 3]>) -> Self {
        Self {
            verdict: margin >= -tol,
            first_violation,
            margin,
            tolerance_used: tol,
            failing_order: None,
            detail: None,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        input(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        ))
    }
}

/// Normalized slack of `lhs <= rhs`.
#[inline]
fn slack(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / (1.0 + rhs)
}

/// Tests `s(n+1)^2 <= s(n) s(n+2)` at every interior point.
///
/// The all-zero sequence passes. Zeros are not special-cased: a zero followed by
/// a positive element fails at the triple where the inequality breaks.
pub fn is_log_convex(s: &NonnegSeq, tol: f64) -> Result<CheckReport> {
    check_tol(tol)?;
    Ok(log_convex_slice(s.as_slice(), s.origin, tol))
}

pub(crate) fn log_convex_slice(v: &[f64], origin: i64, tol: f64) -> CheckReport {
    let mut margin = 0.0_f64;
    let mut first = None;
    for (n, w) in v.windows(3).enumerate() {
        let m = slack(w[1] * w[1], w[0] * w[2]);
        if m < margin {
            margin = m;
        }
        if first.is_none() && m < -tol {
            let x = origin + n as i64;
            first = Some([x, x + 1, x + 2]);
        }
    }
    CheckReport::from_margin(margin, tol, first)
}

/// Log-convexity over every gap: `s(x+y)^2 <= s(x) s(x+2y)` for all `x` and `y >= 1`.
///
/// Equivalent to [`is_log_convex`] for exact data; useful as a second route.
pub fn is_log_convex_all_gaps(s: &NonnegSeq, tol: f64) -> Result<CheckReport> {
    check_tol(tol)?;
    let v = s.as_slice();
    let mut margin = 0.0_f64;
    let mut first = None;
    for x in 0..v.len() {
        let mut y = 1;
        while x + 2 * y < v.len() {
            let m = slack(v[x + y] * v[x + y], v[x] * v[x + 2 * y]);
            margin = margin.min(m);
            if first.is_none() && m < -tol {
                let x0 = s.origin + x as i64;
                let y0 = y as i64;
                first = Some([x0, x0 + y0, x0 + 2 * y0]);
            }
            y += 1;
        }
    }
    Ok(CheckReport::from_margin(margin, tol, first))
}

/// Kaluza test: `s(0) = 1`, `0 < s(n) <= 1` for `n > 0`, and log-convex.
///
/// The degenerate sequence `(1, 0, 0, ...)` is accepted by convention.
pub fn is_kaluza(s: &NonnegSeq, tol: f64) -> Result<CheckReport> {
    check_tol(tol)?;
    let v = s.as_slice();
    let mut report = log_convex_slice(v, s.origin, tol);
    let mut notes = Vec::new();

    let lead = -(v[0] - 1.0).abs();
    if lead < -tol {
        notes.push(format!("leading element {} is not 1", v[0]));
    }
    report.margin = report.margin.min(lead);

    for (n, &x) in v.iter().enumerate().skip(1) {
        let bound = 1.0 - x;
        if bound < report.margin {
            report.margin = bound;
        }
        if bound < -tol {
            notes.push(format!("element {n} = {x} exceeds 1"));
            break;
        }
    }

    // Either every later element is positive, or the tail is identically zero.
    if let Some(z) = v.iter().skip(1).position(|&x| x == 0.0) {
        if let Some(p) = v[z + 1..]
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .reduce(f64::max)
        {
            report.margin = report.margin.min(-p);
            notes.push(format!(
                "zero at position {} followed by positive elements",
                z + 1
            ));
        }
    }

    report.verdict = report.margin >= -tol;
    if !notes.is_empty() {
        report.detail = Some(notes.join("; "));
    }
    Ok(report)
}

/// Necessary-condition test for complete monotonicity: `(-1)^k Δ^k s >= 0` for
/// every order `k <= max_order`.
///
/// A finite sample can only falsify complete monotonicity; passing says nothing
/// about orders beyond `max_order` or elements beyond the sample. Each order gets
/// a rounding allowance `k * 2^k * eps` on top of `tol`, because the `k`-th
/// difference amplifies the representation error of the data by up to `2^k`.
pub fn is_completely_monotone(s: &NonnegSeq, max_order: usize, tol: f64) -> Result<CheckReport> {
    check_tol(tol)?;
    if max_order < 1 || max_order >= s.len() {
        return input(format!(
            "max_order must satisfy 1 <= max_order < {} (sequence length), got {max_order}",
            s.len()
        ));
    }
    let scale = 1.0 + s.values.iter().copied().fold(0.0, f64::max);
    let mut d = s.values.clone();
    let mut margin = 0.0_f64;
    let mut first = None;
    let mut failing_order = None;
    for k in 1..=max_order {
        d = d.windows(2).map(|w| w[0] - w[1]).collect();
        let allowance = tol + (k as f64) * 2f64.powi(k as i32) * f64::EPSILON;
        for (n, &x) in d.iter().enumerate() {
            let m = x / scale;
            margin = margin.min(m + allowance - tol);
            if failing_order.is_none() && m < -allowance {
                failing_order = Some(k);
                let x0 = s.index_of(n);
                first = Some([x0, k as i64, x0 + k as i64]);
            }
        }
    }
    let mut report = CheckReport::from_margin(margin, tol, first);
    report.verdict = failing_order.is_none();
    report.failing_order = failing_order;
    report.detail = Some(format!(
        "necessary condition only: alternating differences checked up to order {max_order}"
    ));
    Ok(report)
}

/// Successive ratios `s(n+1)/s(n)` and whether they are nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProfile {
    pub ratios: Vec<f64>,
    pub nondecreasing: bool,
    /// Position `n` of the first ratio with `ratios[n+1] < ratios[n]`.
    pub first_decrease: Option<usize>,
}

/// Ratio profile of a nonvanishing sequence. A zero tail ends the profile; a zero
/// followed by a positive element is a domain error.
pub fn ratio_profile(s: &NonnegSeq, tol: f64) -> Result<RatioProfile> {
    check_tol(tol)?;
    let v = s.as_slice();
    let mut ratios = Vec::with_capacity(v.len().saturating_sub(1));
    for n in 0..v.len().saturating_sub(1) {
        if v[n] == 0.0 {
            if v[n + 1..].iter().any(|&x| x > 0.0) {
                return Err(Error::Domain(format!(
                    "ratio undefined: element {} is zero but a later element is positive",
                    s.index_of(n)
                )));
            }
            break;
        }
        ratios.push(v[n + 1] / v[n]);
    }
    let first_decrease = ratios
        .windows(2)
        .position(|w| w[1] < w[0] * (1.0 - tol) - tol);
    Ok(RatioProfile {
        nondecreasing: first_decrease.is_none(),
        first_decrease,
        ratios,
    })
}

/// `h(x) = sum_n g(x + n) weights[n]`, the shift mixture of a log-convex sequence.
///
/// Trailing zero weights are dropped. The output keeps only the points where the
/// whole weight vector fits inside `g`, so every output value is an exact finite
/// mixture and log-convexity is inherited without truncation effects.
pub fn shift_mix(g: &NonnegSeq, weights: &[f64], tol: f64) -> Result<NonnegSeq> {
    check_tol(tol)?;
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return input(format!(
            "mixing weights must be finite and nonnegative, got {w}"
        ));
    }
    let lc = is_log_convex(g, tol)?;
    if !lc.verdict {
        return Err(Error::Precondition(format!(
            "shift mixing needs a log-convex input; first violation at {:?}",
            lc.first_violation
        )));
    }
    let m = weights.iter().rposition(|&w| w > 0.0).map_or(0, |i| i + 1);
    if m == 0 {
        return NonnegSeq::with_lattice(g.origin, g.step, vec![0.0; g.len()]);
    }
    if m > g.len() {
        return input(format!(
            "{m} effective weights do not fit a sequence of length {}",
            g.len()
        ));
    }
    let v = g.as_slice();
    let h = (0..=v.len() - m)
        .map(|x| (0..m).map(|n| v[x + n] * weights[n]).sum())
        .collect();
    NonnegSeq::with_lattice(g.origin, g.step, h)
}

/// Seeded strictly positive, nonincreasing log-convex sequence with `s(0) = 1`.
///
/// Built from sorted ratios `r_1 < r_2 < ... < r_{n-1}` in `(0, 1)` with
/// `s(k) = r_1 ... r_k`; every output is also a Kaluza sequence.
pub fn gen_log_convex(seed: u64, n: usize) -> Result<NonnegSeq> {
    if n < 2 {
        return input(format!("generator needs n >= 2, got {n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = rng.gen_range(0.02..0.5);
    let hi = rng.gen_range(0.6..0.95);
    let mut ratios: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(lo..hi)).collect();
    ratios.sort_by(f64::total_cmp);
    for i in 1..ratios.len() {
        let floor = ratios[i - 1] * (1.0 + 1e-6);
        if ratios[i] < floor {
            ratios[i] = floor;
        }
    }
    let mut values = Vec::with_capacity(n);
    values.push(1.0);
    let mut acc = 1.0;
    for r in ratios {
        acc *= r;
        values.push(acc);
    }
    NonnegSeq::new(values)
}

/// `s(k) = sum_i w_i lambda_i^k` for atoms `(lambda_i, w_i)` with `lambda_i in [0, 1)`.
pub fn moment_sequence(atoms: &[(f64, f64)], n: usize) -> Result<NonnegSeq> {
    if n < 1 || atoms.is_empty() {
        return input("moment sequence needs n >= 1 and at least one atom");
    }
    for &(l, w) in atoms {
        if !(0.0..1.0).contains(&l) || !(w > 0.0) {
            return input(format!(
                "atom ({l}, {w}) must have lambda in [0, 1) and weight > 0"
            ));
        }
    }
    let values = (0..n)
        .map(|k| atoms.iter().map(|&(l, w)| w * l.powi(k as i32)).sum())
        .collect();
    NonnegSeq::new(values)
}

/// Seeded moment sequence of a random `atoms`-point probability measure on `[0, 1)`.
pub fn gen_completely_monotone(seed: u64, n: usize, atoms: usize) -> Result<NonnegSeq> {
    if n < 1 || atoms < 1 {
        return input("generator needs n >= 1 and atoms >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(f64, f64)> = (0..atoms)
        .map(|_| (rng.gen_range(0.0..0.98), rng.gen_range(0.05..1.0)))
        .collect();
    let total: f64 = raw.iter().map(|a| a.1).sum();
    let atoms: Vec<(f64, f64)> = raw.into_iter().map(|(l, w)| (l, w / total)).collect();
    let mut s = moment_sequence(&atoms, n)?;
    s.values[0] = 1.0;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> NonnegSeq {
        NonnegSeq::new(v.to_vec()).unwrap()
    }

    #[test]
    fn log_convex_basic_cases() {
        assert!(
            is_log_convex(&seq(&[1.0, 1.0, 1.0]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        let r = is_log_convex(&seq(&[1.0, 0.9, 0.5]), DEFAULT_TOL).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.first_violation, Some([0, 1, 2]));
        let rho: f64 = 0.3;
        let g = is_log_convex(&seq(&[1.0, rho, rho * rho, rho.powi(3)]), DEFAULT_TOL).unwrap();
        assert!(g.verdict);
        assert!(g.margin.abs() < 1e-15);
        assert!(
            is_log_convex(&seq(&[0.0, 0.0, 0.0]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn zero_then_positive_fails_where_inequality_breaks() {
        let r = is_log_convex(&seq(&[1.0, 0.0, 0.5, 0.2]), DEFAULT_TOL).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.first_violation, Some([1, 2, 3]));
    }

    #[test]
    fn violation_labels_follow_origin() {
        let s = NonnegSeq::with_lattice(5, 1.0, vec![1.0, 0.9, 0.5]).unwrap();
        let r = is_log_convex(&s, DEFAULT_TOL).unwrap();
        assert_eq!(r.first_violation, Some([5, 6, 7]));
    }

    #[test]
    fn kaluza_cases() {
        assert!(
            is_kaluza(&seq(&[1.0, 0.5, 0.25, 0.125]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(
            is_kaluza(&seq(&[1.0, 0.0, 0.0, 0.0]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(
            !is_kaluza(&seq(&[1.0, 0.9, 0.5]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(
            !is_kaluza(&seq(&[0.9, 0.5, 0.3]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(
            !is_kaluza(&seq(&[1.0, 0.0, 0.5]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(
            !is_kaluza(&seq(&[1.0, 1.5, 2.25]), DEFAULT_TOL)
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn completely_monotone_cases() {
        let mix = moment_sequence(&[(0.2, 0.5), (0.7, 0.5)], 20).unwrap();
        assert!(
            is_completely_monotone(&mix, 19, DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(
            is_completely_monotone(&seq(&[1.0, 0.5, 0.25]), 2, DEFAULT_TOL)
                .unwrap()
                .verdict
        );
        assert!(is_completely_monotone(&seq(&[1.0, 0.5, 0.25]), 3, DEFAULT_TOL).is_err());
        assert!(is_completely_monotone(&seq(&[1.0, 0.5, 0.25]), 0, DEFAULT_TOL).is_err());
        let r = is_completely_monotone(&seq(&[1.0, 0.5, 0.01]), 2, DEFAULT_TOL).unwrap();
        assert!(r.verdict);
        let r = is_completely_monotone(&seq(&[1.0, 0.5, 0.4, 0.0]), 3, DEFAULT_TOL).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.failing_order, Some(2));
    }

    #[test]
    fn ratio_profiles() {
        let p = ratio_profile(&seq(&[1.0, 0.5, 0.25]), DEFAULT_TOL).unwrap();
        assert_eq!(p.ratios, vec![0.5, 0.5]);
        assert!(p.nondecreasing);
        let p = ratio_profile(&seq(&[1.0, 0.2, 0.1]), DEFAULT_TOL).unwrap();
        assert!((p.ratios[1] - 0.5).abs() < 1e-15);
        assert!(p.nondecreasing);
        let p = ratio_profile(&seq(&[1.0, 0.9, 0.5]), DEFAULT_TOL).unwrap();
        assert!((p.ratios[1] - 0.5 / 0.9).abs() < 1e-15);
        assert!(!p.nondecreasing);
        assert_eq!(p.first_decrease, Some(0));
        assert!(ratio_profile(&seq(&[1.0, 0.0, 0.3]), DEFAULT_TOL).is_err());
        let p = ratio_profile(&seq(&[1.0, 0.0, 0.0]), DEFAULT_TOL).unwrap();
        assert_eq!(p.ratios, vec![0.0]);
    }

    #[test]
    fn shift_mix_of_geometric() {
        let rho: f64 = 0.4;
        let g = seq(&(0..8).map(|k| rho.powi(k)).collect::<Vec<_>>());
        let same = shift_mix(&g, &[1.0, 0.0, 0.0], DEFAULT_TOL).unwrap();
        assert_eq!(same.values, g.values);
        let h = shift_mix(&g, &[1.0, 1.0], DEFAULT_TOL).unwrap();
        assert_eq!(h.len(), 7);
        for (k, v) in h.values.iter().enumerate() {
            assert!((v - (1.0 + rho) * rho.powi(k as i32)).abs() < 1e-15);
        }
        assert!(is_log_convex(&h, DEFAULT_TOL).unwrap().verdict);
        assert!(shift_mix(&seq(&[1.0, 0.9, 0.5]), &[1.0], DEFAULT_TOL).is_err());
        assert!(shift_mix(&g, &[1.0; 9], DEFAULT_TOL).is_err());
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        let a = gen_log_convex(0, 50).unwrap();
        assert_eq!(a, gen_log_convex(0, 50).unwrap());
        let r = is_log_convex(&a, DEFAULT_TOL).unwrap();
        assert!(r.verdict && r.margin >= 0.0);
        assert!(ratio_profile(&a, DEFAULT_TOL).unwrap().nondecreasing);
        assert!(gen_log_convex(3, 1).is_err());
        for seed in 0..20 {
            assert!(
                is_log_convex(&gen_log_convex(seed, 2).unwrap(), 0.0)
                    .unwrap()
                    .verdict
            );
        }

        let one = moment_sequence(&[(0.0, 1.0)], 5).unwrap();
        assert_eq!(one.values, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let geo = moment_sequence(&[(0.6, 1.0)], 5).unwrap();
        assert!((geo.values[3] - 0.216).abs() < 1e-15);

        let cm = gen_completely_monotone(7, 30, 3).unwrap();
        assert_eq!(cm.values[0], 1.0);
        assert!(
            is_completely_monotone(&cm, 29, DEFAULT_TOL)
                .unwrap()
                .verdict
        );
    }
}
