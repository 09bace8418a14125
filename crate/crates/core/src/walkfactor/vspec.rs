use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::law::TwoSidedPmf;
use crate::error::{input, Error, Result};
use crate::seq::GeomTail;
use crate::seqcheck::{gen_log_convex, log_convex_slice, CheckReport, DEFAULT_TOL};

/// Continuation terms appended when probing a tail for log-convexity.
const PROBE_EXTRA: usize = 4;
const NORM_TOL: f64 = 1e-12;

/// Driver sequence `{v_j : j = ±1, ±2, ...}` plus `v_0`.
///
/// `v_neg` holds `v_{-1}, v_{-2}, ...` and `v_pos` holds `v_1, v_2, ...`. Both are
/// infinite sequences (see [`GeomTail`]) and must be log-convex as such.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VSpecRepr")]
pub struct VSpec {
    pub v_neg: GeomTail,
    pub v_pos: GeomTail,
    pub v0: f64,
}

#[derive(Deserialize)]
struct VSpecRepr {
    v_neg: GeomTail,
    v_pos: GeomTail,
    #[serde(default)]
    v0: f64,
}

impl TryFrom<VSpecRepr> for VSpec {
    type Error = Error;

    fn try_from(r: VSpecRepr) -> Result<Self> {
        VSpec::new(r.v_neg, r.v_pos, r.v0)
    }
}

/// Log-convexity report for an infinite one-sided tail; indices are `j = 1, 2, ...`.
pub fn tail_log_convexity(t: &GeomTail, tol: f64) -> CheckReport {
    log_convex_slice(&t.probe(PROBE_EXTRA), 1, tol)
}

impl VSpec {
    pub fn new(v_neg: GeomTail, v_pos: GeomTail, v0: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 >= 0.0) {
            return input(format!("v0 must be nonnegative, got {v0}"));
        }
        for (name, t) in [("v_neg", &v_neg), ("v_pos", &v_pos)] {
            let r = tail_log_convexity(t, DEFAULT_TOL);
            if !r.verdict {
                let [a, b, c] = r.first_violation.unwrap_or([0, 0, 0]);
                return Err(Error::Precondition(format!(
                    "{name} is not log-convex: violation at ({a}, {b}, {c}), margin {:.3e}",
                    r.margin
                )));
            }
        }
        Ok(Self {
            v_neg: v_neg.compact(1e-14),
            v_pos: v_pos.compact(1e-14),
            v0,
        })
    }

    /// `v_j = v_{-j} = rho^{j-1}` for `j >= 1`.
    pub fn symmetric_geometric(rho: f64) -> Result<Self> {
        let t = GeomTail::new(vec![1.0], Some(rho))?;
        Self::new(t.clone(), t, 0.0)
    }

    pub fn neg_sum(&self) -> f64 {
        self.v_neg.total()
    }

    pub fn pos_sum(&self) -> f64 {
        self.v_pos.total()
    }

    /// `v_{-1} + v_0 + v_1`.
    pub fn central_sum(&self) -> f64 {
        self.v_neg.get(0) + self.v0 + self.v_pos.get(0)
    }

    pub fn is_normalized(&self) -> bool {
        (self.neg_sum() - self.pos_sum()).abs() <= NORM_TOL
            && (self.central_sum() - 1.0).abs() <= NORM_TOL
    }

    /// Driver of the atom mixture `alpha delta_0 + (1 - alpha) p`, with `K` the
    /// constant belonging to `self`.
    pub fn with_atom(&self, alpha: f64, k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return input(format!("mixing weight must lie in [0, 1], got {alpha}"));
        }
        let bump = |t: &GeomTail| add_to_first(&t.scaled(1.0 - alpha), k * alpha);
        Self::new(
            bump(&self.v_neg)?,
            bump(&self.v_pos)?,
            (1.0 - alpha) * self.v0,
        )
    }
}

/// Seeded driver whose tails are random log-convex heads of length `len`, continued
/// with their last ratio and scaled by random factors in `[0.2, 2]`.
pub fn gen_vspec(seed: u64, len: usize) -> Result<VSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut side = |salt: u64| -> Result<GeomTail> {
        let s = gen_log_convex(seed.wrapping_mul(2).wrapping_add(salt), len)?;
        let f = rng.gen_range(0.2..2.0);
        GeomTail::continued(s.values.iter().map(|x| x * f).collect())
    };
    let (neg, pos) = (side(0)?, side(1)?);
    let v0 = rng.gen_range(0.0..0.5);
    VSpec::new(neg, pos, v0)
}

/// Adds `by` to the first term only, keeping the geometric continuation intact.
fn add_to_first(t: &GeomTail, by: f64) -> Result<GeomTail> {
    let len = if t.ratio.is_some() {
        t.head_len().max(2)
    } else {
        t.head_len().max(1)
    };
    let mut head = t.materialize(len);
    head[0] += by;
    GeomTail::new(head, t.ratio)
}

/// The law with `K p_x` equal to the tail sums of `v` and `K p_0` the larger total.
///
/// Returns the law and the constant `K`.
pub fn build_p_from_v(v: &VSpec) -> Result<(TwoSidedPmf, f64)> {
    let (sn, sp) = (v.neg_sum(), v.pos_sum());
    if sn == 0.0 && sp == 0.0 {
        return Err(Error::Degenerate("both tails of v vanish".into()));
    }
    let neg = v.v_neg.tail_sums(1);
    let pos = v.v_pos.tail_sums(1);
    let k0 = sn.max(sp);
    let k = k0 + neg.total() + pos.total();
    let law = TwoSidedPmf {
        neg: neg.scaled(1.0 / k).compact(1e-14),
        zero: k0 / k,
        pos: pos.scaled(1.0 / k).compact(1e-14),
        mass_deficit: 0.0,
    };
    // Guard against rounding: re-validate the mass.
    TwoSidedPmf::new(law.neg, law.zero, law.pos, 0.0).map(|p| (p, k))
}

/// Balances the two totals by raising `v_1` (or `v_{-1}`), then scales so that
/// `v_{-1} + v_0 + v_1 = 1`. The law built from `v` is unchanged.
pub fn normalize_v(v: &VSpec) -> Result<VSpec> {
    let (sn, sp) = (v.neg_sum(), v.pos_sum());
    if sn == 0.0 && sp == 0.0 {
        return Err(Error::Degenerate("both tails of v vanish".into()));
    }
    let mut neg = v.v_neg.clone();
    let mut pos = v.v_pos.clone();
    if sn > sp {
        pos = add_to_first(&pos, sn - sp)?;
    } else if sp > sn {
        neg = add_to_first(&neg, sp - sn)?;
    }
    let central = neg.get(0) + v.v0 + pos.get(0);
    let f = 1.0 / central;
    VSpec::new(neg.scaled(f), pos.scaled(f), v.v0 * f)
}

/// Replaces the positive tail beyond `v_k` by the geometric continuation with
/// ratio `v_{k+1} / v_k`; `v_1` absorbs the removed mass.
pub fn geometric_tail(v: &VSpec, k: usize) -> Result<VSpec> {
    if k < 1 {
        return input("truncation index k must be at least 1");
    }
    if !v.v_pos.is_strictly_positive() {
        return Err(Error::Precondition(
            "geometric truncation needs v_j > 0 for every j > 0".into(),
        ));
    }
    let t = &v.v_pos;
    if t.ratio.is_some() && k >= t.head_len() {
        return Ok(v.clone());
    }
    let ratio = t.get(k) / t.get(k - 1);
    let head: Vec<f64> = t.materialize(k);
    let removed = t.total() - GeomTail::new(head.clone(), Some(ratio))?.total();
    if removed < -NORM_TOL * t.total() {
        return Err(Error::Precondition(format!(
            "geometric truncation would add mass {:.3e}; the positive tail is not log-convex",
            -removed
        )));
    }
    let pos = add_to_first(&GeomTail::new(head, Some(ratio))?, removed.max(0.0))?;
    VSpec::new(v.v_neg.clone(), pos, v.v0)
}

/// Increment law `w_j = v_j - v_{j-1}` (`j < 0`), `v_j - v_{j+1}` (`j > 0`), `w_0 = v_0`.
pub fn build_w(v: &VSpec) -> Result<TwoSidedPmf> {
    if !v.is_normalized() {
        return input(format!(
            "v is not normalized: tail sums {} and {}, central sum {}",
            v.neg_sum(),
            v.pos_sum(),
            v.central_sum()
        ));
    }
    let neg = v.v_neg.differences();
    let pos = v.v_pos.differences();
    for (name, t) in [("negative", &neg), ("positive", &pos)] {
        if let Some((i, d)) = t.values.iter().enumerate().find(|(_, d)| **d < -NORM_TOL) {
            return input(format!(
                "{name} tail of v increases at j = {}: difference {d}",
                i + 1
            ));
        }
    }
    let clip = |t: GeomTail| GeomTail {
        values: t.values.iter().map(|d| d.max(0.0)).collect(),
        ratio: t.ratio,
    };
    let (neg, pos) = (clip(neg).compact(1e-14), clip(pos).compact(1e-14));
    let zero = 1.0 - neg.total() - pos.total();
    if (zero - v.v0).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "increment law does not close: w_0 = {zero}, v_0 = {}",
            v.v0
        )));
    }
    TwoSidedPmf::new(neg, zero.max(0.0), pos, 0.0)
}

/// `max_x |K(2 p_x - p_{x-1} - p_{x+1}) + w_x - [x = 0]|` over the range covering
/// both heads and a few continuation terms.
pub fn check_telescoping(p: &TwoSidedPmf, w: &TwoSidedPmf, k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return input(format!("K must be positive, got {k}"));
    }
    if p.mass_deficit > NORM_TOL || w.mass_deficit > NORM_TOL {
        return input("telescoping needs untruncated laws; a mass deficit is present");
    }
    let span = |t: &GeomTail| t.head_len() as i64 + if t.ratio.is_some() { 6 } else { 2 };
    let lo = span(&p.neg).max(span(&w.neg));
    let hi = span(&p.pos).max(span(&w.pos));
    let mut worst = 0.0f64;
    for x in -lo..=hi {
        let lhs = k * (2.0 * p.get(x) - p.get(x - 1) - p.get(x + 1));
        let rhs = if x == 0 { 1.0 - w.get(0) } else { -w.get(x) };
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Driver read off a law with nonincreasing sides:
/// `v_{x+1} = p_x - p_{x+1}` for `x >= 0` and mirrored for `x <= 0`, with `K = 1`.
///
/// Validates log-convexity of the resulting tails like [`VSpec::new`].
pub fn vspec_from_pmf_differences(p: &TwoSidedPmf) -> Result<VSpec> {
    let side = |t: &GeomTail| -> Result<GeomTail> {
        let mut vals = vec![p.zero];
        vals.extend(t.materialize(t.head_len() + 1));
        let with_zero = GeomTail::new(vals, t.ratio.filter(|_| t.head_len() > 0))?;
        let d = with_zero.differences().compact(0.0);
        if let Some((i, x)) = d.values.iter().enumerate().find(|(_, x)| **x < -NORM_TOL) {
            return input(format!(
                "law increases away from 0 at |x| = {}: difference {x}",
                i + 1
            ));
        }
        GeomTail::new(d.values.iter().map(|x| x.max(0.0)).collect(), d.ratio)
    };
    let neg = side(&p.neg)?;
    let pos = side(&p.pos)?;
    VSpec::new(neg, pos, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_geometric_law() {
        let v = VSpec::symmetric_geometric(0.5).unwrap();
        let (p, k) = build_p_from_v(&v).unwrap();
        // K p_x = sum_{j > |x|} 2^{1-j} = 2^{1-|x|}, K p_0 = 2.
        assert!((k - 6.0).abs() < 1e-14);
        for x in -10..=10i64 {
            let expected = 2f64.powi(1 - x.abs() as i32) / 6.0;
            assert!((p.get(x) - expected).abs() < 1e-15, "x = {x}");
        }
        assert!((p.get(7) - p.get(-7)).abs() < 1e-17);
    }

    #[test]
    fn rejects_nonconvex_tails_and_degenerate_input() {
        assert!(VSpec::new(
            GeomTail::finite(vec![1.0, 0.9, 0.5]).unwrap(),
            GeomTail::zero(),
            0.0
        )
        .is_err());
        // A finite head with two positive entries drops to zero: not log-convex.
        assert!(VSpec::new(
            GeomTail::finite(vec![1.0, 0.5]).unwrap(),
            GeomTail::zero(),
            0.0
        )
        .is_err());
        let z = VSpec::new(GeomTail::zero(), GeomTail::zero(), 0.0).unwrap();
        assert!(matches!(build_p_from_v(&z), Err(Error::Degenerate(_))));
    }

    #[test]
    fn one_sided_law() {
        let v = VSpec::new(
            GeomTail::new(vec![0.5], Some(0.5)).unwrap(),
            GeomTail::zero(),
            0.0,
        )
        .unwrap();
        let (p, _) = build_p_from_v(&v).unwrap();
        assert!(p.pos.is_zero());
        assert!(p.get(-3) > 0.0);
    }

    #[test]
    fn normalization_balances_v1() {
        let v = VSpec::new(
            GeomTail::new(vec![0.3], Some(0.5)).unwrap(),
            GeomTail::new(vec![0.2], Some(0.5)).unwrap(),
            0.0,
        )
        .unwrap();
        assert!((v.neg_sum() - 0.6).abs() < 1e-15 && (v.pos_sum() - 0.4).abs() < 1e-15);
        let n = normalize_v(&v).unwrap();
        assert!(n.is_normalized());
        // v_1 was raised by 0.2 before scaling by 1 / (0.3 + 0.4).
        assert!((n.v_pos.get(0) - 0.4 / 0.7).abs() < 1e-15);
        assert!((n.v_pos.get(1) - 0.1 / 0.7).abs() < 1e-15);
        let (p0, _) = build_p_from_v(&v).unwrap();
        let (p1, _) = build_p_from_v(&n).unwrap();
        assert!(super::super::law::tv_distance(&p0, &p1) < 1e-15);
        let again = normalize_v(&n).unwrap();
        assert!(
            again.v_pos.get(0) == n.v_pos.get(0)
                || (again.v_pos.get(0) - n.v_pos.get(0)).abs() < 1e-15
        );
    }

    #[test]
    fn geometric_tail_fixed_point_and_truncation() {
        let v = VSpec::symmetric_geometric(0.4).unwrap();
        for k in 1..5 {
            assert_eq!(geometric_tail(&v, k).unwrap(), v);
        }
        let pos = GeomTail::new(vec![1.0, 0.5, 0.3, 0.2, 0.14], Some(0.72)).unwrap();
        let v = VSpec::new(
            GeomTail::new(vec![1.0], Some(0.3)).unwrap(),
            pos.clone(),
            0.0,
        )
        .unwrap();
        let g = geometric_tail(&v, 2).unwrap();
        assert_eq!(g.v_pos.ratio, Some(0.6));
        assert!((g.pos_sum() - v.pos_sum()).abs() < 1e-14);
        assert!((g.v_pos.get(4) - 0.5 * 0.6f64.powi(3)).abs() < 1e-15);
        assert!(geometric_tail(&v, 0).is_err());
        let finite =
            VSpec::new(GeomTail::zero(), GeomTail::finite(vec![1.0]).unwrap(), 0.0).unwrap();
        assert!(matches!(
            geometric_tail(&finite, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn increments_of_symmetric_driver() {
        let rho: f64 = 0.3;
        let v = normalize_v(&VSpec::symmetric_geometric(rho).unwrap()).unwrap();
        let w = build_w(&v).unwrap();
        assert!(w.mean().abs() < 1e-15);
        assert!((w.total() - 1.0).abs() < 1e-15);
        let v1 = v.v_pos.get(0);
        for j in 1..6i64 {
            let expected = v1 * rho.powi(j as i32 - 1) * (1.0 - rho);
            assert!((w.get(j) - expected).abs() < 1e-16 && (w.get(-j) - expected).abs() < 1e-16);
        }
        assert!(build_w(&VSpec::symmetric_geometric(rho).unwrap()).is_err());
    }

    #[test]
    fn telescoping_holds_and_detects_mismatch() {
        let v = normalize_v(&VSpec::symmetric_geometric(0.6).unwrap()).unwrap();
        let (p, k) = build_p_from_v(&v).unwrap();
        let w = build_w(&v).unwrap();
        assert!(check_telescoping(&p, &w, k).unwrap() < 1e-12);
        let other = normalize_v(&VSpec::symmetric_geometric(0.2).unwrap()).unwrap();
        let w2 = build_w(&other).unwrap();
        assert!(check_telescoping(&p, &w2, k).unwrap() > 0.01);
    }

    #[test]
    fn atom_driver_regenerates_mixture() {
        let v = VSpec::symmetric_geometric(0.5).unwrap();
        let (p, k) = build_p_from_v(&v).unwrap();
        let va = v.with_atom(0.3, k).unwrap();
        let (pa, ka) = build_p_from_v(&va).unwrap();
        assert!((ka - k).abs() < 1e-13);
        let m = super::super::law::mixture_with_atom(&p, 0.3).unwrap();
        assert!(super::super::law::tv_distance(&pa, &m) < 1e-14);
    }

    #[test]
    fn differences_recover_driver() {
        let v = normalize_v(&VSpec::symmetric_geometric(0.5).unwrap()).unwrap();
        let (p, _) = build_p_from_v(&v).unwrap();
        let d = vspec_from_pmf_differences(&p).unwrap();
        let (q, kq) = build_p_from_v(&d).unwrap();
        assert!((kq - 1.0).abs() < 1e-14);
        assert!(super::super::law::tv_distance(&p, &q) < 1e-15);
    }
}
