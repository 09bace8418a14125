use serde::{Deserialize, Serialize};

use super::family::{FnHandle, MeasureFn};
use super::quad::QuadConfig;
use crate::error::{input, Error, Result};
use crate::seq::{GeomTail, NonnegSeq};
use crate::seqcheck::{is_log_convex, CheckReport};
use crate::walkfactor::{TwoSidedPmf, VSpec};

/// Grid points per lattice cell used for the sup-distance bound.
const SUP_GRID_PER_CELL: usize = 16;

/// Lattice increments of `G_n` and the sup-grid comparison with `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Discretization {
    pub n: usize,
    /// `G_n(x) - G_n(x-)` at `x = a + m / n`, `m = 0..m_max`, on a lattice of step `1/n`.
    pub increments: NonnegSeq,
    pub log_convex: CheckReport,
    /// `max |G_n(x) - G(x)|` over the grid.
    pub sup_error: f64,
    /// `max G(x + 1/n) - G(x)` over the same grid.
    pub sup_bound: f64,
    /// Whether `|G_n(x) - G(x)| <= G(x + 1/n) - G(x)` at every grid point.
    pub bound_holds: bool,
}

/// Discretizes a measure function onto `{a, a + 1/n, ...}` by moving each cell's
/// mass to its left end.
pub fn discretize_lemma2(
    g: &MeasureFn,
    n: usize,
    m_max: usize,
    tol: f64,
) -> Result<Lemma2Discretization> {
    if n == 0 || m_max == 0 {
        return input("n and m_max must be at least 1");
    }
    let a = g.domain_start();
    let h = 1.0 / n as f64;
    let mut inc = Vec::with_capacity(m_max);
    for m in 0..m_max {
        let x = a + m as f64 * h;
        let d = g.increment(x, h)? + if m == 0 { g.eval(a)? } else { 0.0 };
        if d < 0.0 {
            return input(format!(
                "measure function decreases on [{x}, {}]: increment {d}",
                x + h
            ));
        }
        inc.push(d);
    }
    let increments = NonnegSeq::with_lattice(0, h, inc)?;
    let log_convex = is_log_convex(&increments, tol)?;

    let (mut sup_error, mut sup_bound, mut bound_holds) = (0.0f64, 0.0f64, true);
    let per = SUP_GRID_PER_CELL as f64;
    for m in 1..=m_max {
        for j in 0..SUP_GRID_PER_CELL {
            // Offset by half a grid step so that x + 1/n lies strictly past a + m/n.
            let x = a + (m as f64 - 1.0 + (j as f64 + 0.5) / per) * h;
            let gx = g.eval(x)?;
            let gn = g.eval(a + m as f64 * h)?;
            let err = (gn - gx).abs();
            let bound = g.eval(x + h)? - gx;
            if gn < gx || err > bound {
                bound_holds = false;
            }
            sup_error = sup_error.max(err);
            sup_bound = sup_bound.max(bound);
        }
    }
    Ok(Lemma2Discretization {
        n,
        increments,
        log_convex,
        sup_error,
        sup_bound,
        bound_holds: bound_holds && sup_error <= sup_bound,
    })
}

/// Density `f_2(x) = int_{|x|}^inf v_1` for `x < 0` and `int_x^inf v_2` for `x > 0`, normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDensity {
    pub v1: FnHandle,
    pub v2: FnHandle,
    /// `int_0^inf y (v_1 + v_2)(y) dy`.
    pub normalizer: f64,
    pub neg_mass: f64,
}

impl TailDensity {
    pub fn eval(&self, x: f64, cfg: &QuadConfig) -> Result<f64> {
        let t = if x < 0.0 {
            self.v1.tail_integral(-x, cfg)?
        } else {
            self.v2.tail_integral(x, cfg)?
        };
        Ok(t / self.normalizer)
    }

    /// Distribution function of the density.
    pub fn cdf(&self, x: f64, cfg: &QuadConfig) -> Result<f64> {
        if x < 0.0 {
            Ok(self.v1.second_tail_integral(-x, cfg)? / self.normalizer)
        } else {
            Ok(1.0 - self.v2.second_tail_integral(x, cfg)? / self.normalizer)
        }
    }
}

/// Builds the tail-integral density of two log-convex functions on `(0, inf)`.
pub fn tail_integral_density(
    v1: &FnHandle,
    v2: &FnHandle,
    cfg: &QuadConfig,
) -> Result<TailDensity> {
    let mass = |v: &FnHandle, side: &str| -> Result<f64> {
        // Decay probe ahead of the quadrature: y^3 v(y) must shrink far out.
        let far = [1e2, 1e3, 1e4].map(|y: f64| y.powi(3) * v.eval(y));
        if far.iter().any(|x| !x.is_finite())
            || (far[2] > far[1] && far[1] > far[0] && far[2] > 1e-12)
        {
            return input(format!("{side} tail integral diverges: y^3 v(y) grows"));
        }
        let m = v
            .second_tail_integral(0.0, cfg)
            .map_err(|e| Error::Input(format!("{side} tail integral diverges: {e}")))?;
        if !m.is_finite() || m < 0.0 {
            return input(format!("{side} tail integral diverges"));
        }
        Ok(m)
    };
    let (m1, m2) = (mass(v1, "negative")?, mass(v2, "positive")?);
    let normalizer = m1 + m2;
    if !(normalizer > 0.0) {
        return input("both tail functions vanish");
    }
    Ok(TailDensity {
        v1: v1.clone(),
        v2: v2.clone(),
        normalizer,
        neg_mass: m1 / normalizer,
    })
}

/// Truncation of the discretized tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cor3Cutoffs {
    /// Hard cap on the number of explicit terms per side.
    pub max_terms: usize,
    /// Stop once a term falls below this fraction of the first term.
    pub rel_tail: f64,
}

impl Default for Cor3Cutoffs {
    fn default() -> Self {
        Self {
            max_terms: 4096,
            rel_tail: 1e-16,
        }
    }
}

/// Driver `v^(n)` on the lattice of step `1/n`: `v_{+-j} = int int v((j-1)/n + y + z)` over
/// `[0, 1/n]^2`, continued geometrically with the last ratio.
pub fn discretize_corollary3(
    v1: &FnHandle,
    v2: &FnHandle,
    n: usize,
    cutoffs: &Cor3Cutoffs,
    cfg: &QuadConfig,
) -> Result<VSpec> {
    if n == 0 || cutoffs.max_terms < 2 {
        return input("n must be at least 1 and at least two terms are needed");
    }
    let h = 1.0 / n as f64;
    let side = |v: &FnHandle, sign: i64| -> Result<GeomTail> {
        let mut head: Vec<f64> = Vec::new();
        for j in 1..=cutoffs.max_terms {
            let x0 = (j - 1) as f64 * h;
            let d = v.double_cell_integral(x0, h, cfg).map_err(|e| {
                Error::Numerical(format!(
                    "cell integral failed at j = {}: {e}",
                    sign * j as i64
                ))
            })?;
            if !(d >= 0.0) {
                return Err(Error::Numerical(format!(
                    "cell integral at j = {} is {d}",
                    sign * j as i64
                )));
            }
            head.push(d);
            if head[0] == 0.0 || (head.len() >= 2 && d <= cutoffs.rel_tail * head[0]) {
                break;
            }
        }
        if head[0] == 0.0 {
            return Ok(GeomTail::zero());
        }
        GeomTail::continued(head)
    };
    VSpec::new(side(v1, -1)?, side(v2, 1)?, 0.0)
}

/// `F(x)` for the lattice law `p` whose mass `p_k` sits at `(k + 1) / n`.
pub fn lattice_cdf(p: &TwoSidedPmf, n: usize, x: f64) -> f64 {
    let k_max = (x * n as f64).floor() as i64 - 1;
    let mut f = 0.0;
    if k_max >= 0 {
        f += p.neg.total() + p.zero;
        f += (1..=k_max).map(|k| p.get(k)).sum::<f64>();
    } else {
        // Sum of p_k for k <= k_max < 0.
        f += p.neg.sum_from((-k_max - 1) as usize);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walkfactor::build_p_from_v;

    #[test]
    fn exponential_increments_are_geometric() {
        let g = MeasureFn::exp_df(0.0, 1.0, 0.0).unwrap();
        for n in [1, 2, 4, 8] {
            let d = discretize_lemma2(&g, n, 40, 1e-9).unwrap();
            let h = 1.0 / n as f64;
            for m in 0..40 {
                let expected = (-(m as f64) * h).exp() * (1.0 - (-h).exp());
                assert!((d.increments[m] - expected).abs() < 1e-15);
            }
            assert!(d.log_convex.verdict && d.bound_holds);
            assert!(d.sup_error <= d.sup_bound);
        }
    }

    #[test]
    fn atom_at_origin() {
        let g = MeasureFn::exp_df(0.0, 1.0, 0.3).unwrap();
        let d = discretize_lemma2(&g, 4, 30, 1e-9).unwrap();
        assert!((d.increments[0] - (0.3 + 0.7 * (1.0 - (-0.25f64).exp()))).abs() < 1e-15);
        assert!(d.log_convex.verdict && d.bound_holds);
    }

    #[test]
    fn decreasing_function_is_rejected() {
        let bad = MeasureFn::Integral {
            a: 0.0,
            atom: 0.0,
            density: FnHandle::custom("neg", |x: f64| -(-x).exp(), vec![], false),
        };
        assert!(matches!(
            discretize_lemma2(&bad, 2, 5, 1e-9),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn laplace_density() {
        let cfg = QuadConfig::default();
        let e = FnHandle::exponential(1.0, 1.0).unwrap();
        let f = tail_integral_density(&e, &e, &cfg).unwrap();
        for x in [-2.0, -0.5, 0.3, 1.7] {
            assert!((f.eval(x, &cfg).unwrap() - 0.5 * (-f64::abs(x)).exp()).abs() < 1e-15);
        }
        assert!((f.cdf(0.0, &cfg).unwrap() - 0.5).abs() < 1e-15);
        let heavy = FnHandle::custom("heavy", |y: f64| 1.0 / (1.0 + y).powi(2), vec![], true);
        assert!(matches!(
            tail_integral_density(&heavy, &e, &cfg),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn exponential_driver_is_geometric() {
        let cfg = QuadConfig::default();
        let e = FnHandle::exponential(1.0, 1.0).unwrap();
        let v = discretize_corollary3(&e, &e, 4, &Cor3Cutoffs::default(), &cfg).unwrap();
        let r = (-0.25f64).exp();
        for j in 1..20 {
            assert!((v.v_pos.get(j) / v.v_pos.get(j - 1) - r).abs() < 1e-12);
        }
        let (p, _) = build_p_from_v(&v).unwrap();
        assert!((lattice_cdf(&p, 4, 100.0) - 1.0).abs() < 1e-12);
        assert!(lattice_cdf(&p, 4, -100.0) < 1e-40);
    }
}
