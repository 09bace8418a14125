use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::seq::GeomTail;

const MASS_TOL: f64 = 1e-12;

/// Probability mass function on the integers: negative tail (`x = -1, -2, ...`),
/// atom at 0 and positive tail (`x = 1, 2, ...`).
///
/// Tails may carry a geometric continuation, in which case they are exact.
/// `mass_deficit` is mass that is not represented at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawRepr")]
pub struct TwoSidedPmf {
    pub neg: GeomTail,
    pub zero: f64,
    pub pos: GeomTail,
    pub mass_deficit: f64,
}

#[derive(Deserialize)]
struct LawRepr {
    #[serde(default = "GeomTail::zero")]
    neg: GeomTail,
    zero: f64,
    #[serde(default = "GeomTail::zero")]
    pos: GeomTail,
    #[serde(default)]
    mass_deficit: f64,
}

impl TryFrom<LawRepr> for TwoSidedPmf {
    type Error = Error;

    fn try_from(r: LawRepr) -> Result<Self> {
        TwoSidedPmf::new(r.neg, r.zero, r.pos, r.mass_deficit)
    }
}

impl TwoSidedPmf {
    pub fn new(neg: GeomTail, zero: f64, pos: GeomTail, mass_deficit: f64) -> Result<Self> {
        if !(zero.is_finite() && zero >= 0.0) {
            return input(format!("mass at 0 must be nonnegative, got {zero}"));
        }
        if !(mass_deficit.is_finite() && mass_deficit >= 0.0) {
            return input(format!(
                "mass deficit must be nonnegative, got {mass_deficit}"
            ));
        }
        let law = Self {
            neg,
            zero,
            pos,
            mass_deficit,
        };
        let total = law.total() + mass_deficit;
        if (total - 1.0).abs() > MASS_TOL {
            return input(format!("two-sided law has total mass {total}, not 1"));
        }
        Ok(law)
    }

    /// Point mass at the origin.
    pub fn degenerate() -> Self {
        Self {
            neg: GeomTail::zero(),
            zero: 1.0,
            pos: GeomTail::zero(),
            mass_deficit: 0.0,
        }
    }

    /// Represented mass (excluding the deficit).
    pub fn total(&self) -> f64 {
        self.neg.total() + self.zero + self.pos.total()
    }

    pub fn get(&self, x: i64) -> f64 {
        match x {
            0 => self.zero,
            x if x > 0 => self.pos.get(x as usize - 1),
            x => self.neg.get((-x) as usize - 1),
        }
    }

    /// `sum_x p_x x`.
    pub fn mean(&self) -> f64 {
        moment(&self.pos) - moment(&self.neg)
    }

    pub fn is_degenerate(&self) -> bool {
        self.neg.is_zero() && self.pos.is_zero()
    }

    /// `sum_x p_x e^{tx}` over the represented mass.
    pub fn mgf(&self, t: f64) -> Result<f64> {
        Ok(self.zero + self.pos.transform(t.exp(), 1)? + self.neg.transform((-t).exp(), 1)?)
    }

    /// `sum_x p_x (e^{tx} - 1)`.
    pub fn mgf_minus_mass(&self, t: f64) -> Result<f64> {
        Ok(self.pos.expm1_transform(t, 1)? + self.neg.expm1_transform(-t, 1)?)
    }

    /// Largest `|x|` needed on each side so that the omitted mass is below `eps`.
    pub fn extent(&self, eps: f64) -> (usize, usize) {
        (self.neg.effective_len(eps), self.pos.effective_len(eps))
    }

    pub fn scaled_tails(&self, factor: f64, zero: f64) -> Self {
        Self {
            neg: self.neg.scaled(factor),
            zero,
            pos: self.pos.scaled(factor),
            mass_deficit: self.mass_deficit * factor,
        }
    }

    /// Mirror image `x -> -x`.
    pub fn reflected(&self) -> Self {
        Self {
            neg: self.pos.clone(),
            zero: self.zero,
            pos: self.neg.clone(),
            mass_deficit: self.mass_deficit,
        }
    }
}

fn moment(t: &GeomTail) -> f64 {
    let n = t.values.len();
    let mut acc: f64 = t
        .values
        .iter()
        .enumerate()
        .map(|(i, a)| (i + 1) as f64 * a)
        .sum();
    if let (Some(r), true) = (t.ratio, n > 0) {
        // sum_{m >= 1} (n + m) a r^m
        let a = t.values[n - 1];
        acc += a * (n as f64 * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
    }
    acc
}

/// Total-variation distance `(1/2) sum_x |a_x - b_x|`, tails beyond `1e-18` mass
/// and both deficits counted in full.
pub fn tv_distance(a: &TwoSidedPmf, b: &TwoSidedPmf) -> f64 {
    let eps = 1e-18;
    let (an, ap) = a.extent(eps);
    let (bn, bp) = b.extent(eps);
    let (ln, lp) = (an.max(bn) as i64, ap.max(bp) as i64);
    let mut d = 0.0;
    for x in -ln..=lp {
        d += (a.get(x) - b.get(x)).abs();
    }
    let rest = |p: &TwoSidedPmf| p.neg.sum_from(ln as usize) + p.pos.sum_from(lp as usize);
    0.5 * (d + rest(a) + rest(b) + a.mass_deficit + b.mass_deficit)
}

/// Atom mixture `alpha * delta_0 + (1 - alpha) * p`.
pub fn mixture_with_atom(p: &TwoSidedPmf, alpha: f64) -> Result<TwoSidedPmf> {
    check_alpha(alpha)?;
    Ok(p.scaled_tails(1.0 - alpha, alpha + (1.0 - alpha) * p.zero))
}

/// Same mixture for a law on `{0, 1, ...}`.
pub fn mixture_with_atom_lattice(
    p: &crate::decompose::LatticePmf,
    alpha: f64,
) -> Result<crate::decompose::LatticePmf> {
    check_alpha(alpha)?;
    let mut probs: Vec<f64> = p.probs.iter().map(|q| q * (1.0 - alpha)).collect();
    probs[0] += alpha;
    crate::decompose::LatticePmf::new(probs, p.mass_deficit * (1.0 - alpha))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        input(format!("mixing weight must lie in [0, 1], got {alpha}"))
    }
}

/// Two-sided law `p_x = p0 m1_{|x|}` (`x < 0`), `p0 m2_x` (`x > 0`) where `m1`, `m2`
/// are the moment sequences of finite probability measures on `[0, 1)`.
///
/// The moment sequences are kept until the remaining mass is below `1e-17` and
/// then continued with their last ratio. `p0` must make the total mass 1;
/// [`cm_two_sided_p0`] computes it.
pub fn cm_two_sided(m1: &[(f64, f64)], m2: &[(f64, f64)], p0: f64) -> Result<TwoSidedPmf> {
    let expected = cm_two_sided_p0(m1, m2)?;
    if (p0 - expected).abs() > MASS_TOL {
        return input(format!(
            "p0 = {p0} does not normalize the law; it must be {expected}"
        ));
    }
    let neg = moment_tail(m1, expected)?;
    let pos = moment_tail(m2, expected)?;
    let zero = 1.0 - neg.total() - pos.total();
    TwoSidedPmf::new(neg, zero, pos, 0.0)
}

/// Mass at 0 that normalizes [`cm_two_sided`].
pub fn cm_two_sided_p0(m1: &[(f64, f64)], m2: &[(f64, f64)]) -> Result<f64> {
    let s1 = moment_tail_sum(m1)?;
    let s2 = moment_tail_sum(m2)?;
    Ok(1.0 / (1.0 + s1 + s2))
}

fn check_atoms(atoms: &[(f64, f64)]) -> Result<()> {
    if atoms.is_empty() {
        return input("mixing measure needs at least one atom");
    }
    for &(l, w) in atoms {
        if !(0.0..1.0).contains(&l) || !(w > 0.0 && w.is_finite()) {
            return input(format!(
                "atom ({l}, {w}) must have location in [0, 1) and positive weight"
            ));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > MASS_TOL {
        return input(format!("mixing weights sum to {total}, not 1"));
    }
    Ok(())
}

/// `sum_{n >= 1} m_n = sum_i w_i l_i / (1 - l_i)`.
fn moment_tail_sum(atoms: &[(f64, f64)]) -> Result<f64> {
    check_atoms(atoms)?;
    Ok(atoms.iter().map(|&(l, w)| w * l / (1.0 - l)).sum())
}

fn moment_tail(atoms: &[(f64, f64)], p0: f64) -> Result<GeomTail> {
    let lmax = atoms.iter().map(|a| a.0).fold(0.0, f64::max);
    if lmax == 0.0 {
        return Ok(GeomTail::zero());
    }
    let len = ((1e-17f64).ln() / lmax.ln()).ceil().clamp(2.0, 20_000.0) as usize;
    let head: Vec<f64> = (1..=len)
        .map(|n| {
            p0 * atoms
                .iter()
                .map(|&(l, w)| w * l.powi(n as i32))
                .sum::<f64>()
        })
        .collect();
    Ok(GeomTail::continued(head)?.compact(1e-14))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace(rho: f64) -> TwoSidedPmf {
        let c = (1.0 - rho) / (1.0 + rho);
        let tail = GeomTail::new(vec![c * rho], Some(rho)).unwrap();
        TwoSidedPmf::new(tail.clone(), c, tail, 0.0).unwrap()
    }

    #[test]
    fn parses_and_validates() {
        let p: TwoSidedPmf = serde_json::from_str(
            r#"{"neg": [0.25], "zero": 0.5, "pos": [0.25], "mass_deficit": 0}"#,
        )
        .unwrap();
        assert_eq!(p.get(-1), 0.25);
        assert_eq!(p.get(2), 0.0);
        assert!(serde_json::from_str::<TwoSidedPmf>(r#"{"neg": [0.25], "zero": 0.5}"#).is_err());
        let g: TwoSidedPmf = serde_json::from_str(
            r#"{"neg": {"values": [0.25], "ratio": 0.5}, "zero": 0.5, "pos": [], "mass_deficit": 0}"#,
        )
        .unwrap();
        assert!((g.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mean_and_mgf_of_symmetric_law() {
        let p = laplace(0.4);
        assert!(p.mean().abs() < 1e-15);
        let t: f64 = 0.3;
        let direct: f64 = (-200..=200i64)
            .map(|x| p.get(x) * (t * x as f64).exp())
            .sum();
        assert!((p.mgf(t).unwrap() - direct).abs() < 1e-14);
        assert!((p.mgf_minus_mass(t).unwrap() - (direct - 1.0)).abs() < 1e-14);
        assert!(p.mgf(1.0).is_err());
    }

    #[test]
    fn one_sided_moment() {
        let p = TwoSidedPmf::new(
            GeomTail::zero(),
            0.5,
            GeomTail::new(vec![0.25], Some(0.5)).unwrap(),
            0.0,
        )
        .unwrap();
        // 0.5 * Geometric(1/2) on {0,1,...} has mean 1.
        assert!((p.mean() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn atom_mixture_edges() {
        let p = laplace(0.3);
        assert_eq!(mixture_with_atom(&p, 0.0).unwrap(), p);
        let d = mixture_with_atom(&p, 1.0).unwrap();
        assert!(d.is_degenerate() && (d.zero - 1.0).abs() < 1e-15);
        assert!(mixture_with_atom(&p, 1.5).is_err());
        let m = mixture_with_atom(&p, 0.3).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_distance_basics() {
        let a = laplace(0.3);
        assert!(tv_distance(&a, &a) < 1e-15);
        let d = TwoSidedPmf::degenerate();
        assert!((tv_distance(&a, &d) - (1.0 - a.zero)).abs() < 1e-12);
    }

    #[test]
    fn completely_monotone_law() {
        let m = [(0.5, 1.0)];
        let p0 = cm_two_sided_p0(&m, &m).unwrap();
        assert!((p0 - 1.0 / 3.0).abs() < 1e-15);
        let p = cm_two_sided(&m, &m, p0).unwrap();
        assert!((p.get(3) - p0 * 0.125).abs() < 1e-15);
        assert!(cm_two_sided(&m, &m, 0.5).is_err());
        let z = [(0.0, 1.0)];
        let d = cm_two_sided(&z, &z, 1.0).unwrap();
        assert!(d.is_degenerate());
        let mix = [(0.2, 0.5), (0.7, 0.5)];
        let p = cm_two_sided(&mix, &m, cm_two_sided_p0(&mix, &m).unwrap()).unwrap();
        let expected = p.zero * (0.5 * 0.2f64.powi(5) + 0.5 * 0.7f64.powi(5));
        assert!((p.get(-5) - expected).abs() < 1e-15);
    }
}
