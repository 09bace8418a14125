use serde::{Deserialize, Serialize};

use super::law::TwoSidedPmf;
use crate::error::{input, Error, Result};
use crate::seq::GeomTail;

/// How a [`LadderFactor`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderMethod {
    /// Rational Wiener-Hopf factorization; exact up to root-finding accuracy.
    Exact,
    /// First-passage dynamic programming on a truncated strip.
    Dp,
}

/// Ladder-height laws of the random walk with increment law `w`.
///
/// `desc_weak` holds the weak descending height at `0, -1, -2, ...` (position `i`
/// is height `-i`); `asc_strict` holds the strict ascending height at `1, 2, ...`
/// (position `i` is height `i + 1`). `nu1`/`nu2` are the visit intensities in
/// `H-(i) = sum_n w(i - n) nu1(n)` and `H+(i) = sum_n w(i + n) nu2(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderFactor {
    pub method: LadderMethod,
    pub desc_weak: GeomTail,
    pub asc_strict: GeomTail,
    pub desc_deficit: f64,
    pub asc_deficit: f64,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub dp_step_cutoff: Option<usize>,
    pub dp_support_cutoff: Option<usize>,
    /// `max_x |(delta_0 - w) - (delta_0 - H-) * (delta_0 - H+)|` over the checked window.
    pub residual: f64,
    /// Set when the DP accumulated less than half of either ladder mass.
    pub low_mass_warning: bool,
    pub degenerate: bool,
}

impl LadderFactor {
    pub fn max_deficit(&self) -> f64 {
        self.desc_deficit.max(self.asc_deficit)
    }

    /// Mass of the weak descending height at `x <= 0`.
    pub fn desc_at(&self, x: i64) -> f64 {
        if x > 0 {
            0.0
        } else {
            self.desc_weak.get((-x) as usize)
        }
    }

    /// Mass of the strict ascending height at `x >= 1`.
    pub fn asc_at(&self, x: i64) -> f64 {
        if x < 1 {
            0.0
        } else {
            self.asc_strict.get(x as usize - 1)
        }
    }
}

/// Tail sequences `v1*_j = P{-Z1 > j}` and `v2*_j = P{Z2 > j}`, `j = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorTails {
    pub tails1: GeomTail,
    pub tails2: GeomTail,
}

/// Tail sequences of the two ladder heights. Refuses factors whose mass
/// deficit exceeds `max_deficit`.
pub fn factor_tails(lf: &LadderFactor, max_deficit: f64) -> Result<FactorTails> {
    if lf.max_deficit() > max_deficit {
        return Err(Error::Precondition(format!(
            "ladder mass deficit {:.3e} exceeds {max_deficit:.1e}; increase the step and support cutoffs",
            lf.max_deficit()
        )));
    }
    Ok(FactorTails {
        tails1: lf.desc_weak.tail_sums(1),
        tails2: lf.asc_strict.tail_sums(0),
    })
}

/// Truncated increment law on `[-support, support]` with the mass beyond each
/// end available in closed form.
struct Kernel {
    support: i64,
    probs: Vec<f64>,
}

impl Kernel {
    fn new(w: &TwoSidedPmf, support: i64) -> Self {
        let probs = (-support..=support).map(|x| w.get(x)).collect();
        Self { support, probs }
    }

    fn get(&self, x: i64) -> f64 {
        if x.abs() > self.support {
            0.0
        } else {
            self.probs[(x + self.support) as usize]
        }
    }
}

/// `P{J >= x}` for the increment `J`.
fn upper_tail(w: &TwoSidedPmf, x: i64) -> f64 {
    if x >= 1 {
        w.pos.sum_from(x as usize - 1)
    } else {
        w.pos.total() + w.zero + w.neg.total() - lower_tail(w, x - 1)
    }
}

/// `P{J <= x}` for the increment `J`.
fn lower_tail(w: &TwoSidedPmf, x: i64) -> f64 {
    if x <= -1 {
        w.neg.sum_from((-x) as usize - 1)
    } else {
        w.neg.total() + w.zero + w.pos.total() - upper_tail(w, x + 1)
    }
}

/// Ladder heights by first-passage dynamic programming.
///
/// Runs the walk for `step_cutoff` steps on the strip of width `support_cutoff`
/// below (ascending) or above (descending) the origin; paths leaving the strip on
/// the far side are dropped and show up in the reported deficit. Ladder masses
/// beyond the strip are accumulated in the totals but stored only up to the
/// cutoff.
pub fn ladder_heights_dp(
    w: &TwoSidedPmf,
    step_cutoff: usize,
    support_cutoff: usize,
) -> Result<LadderFactor> {
    if step_cutoff < 1 || support_cutoff < 1 {
        return input("step and support cutoffs must be at least 1");
    }
    if w.is_degenerate() {
        return Ok(degenerate_factor(
            w,
            Some(step_cutoff),
            Some(support_cutoff),
        ));
    }
    let l = support_cutoff as i64;
    let kern = Kernel::new(w, 2 * l + 1);

    // Strict ascending: states 0, -1, ..., -L (position n is level -n).
    let mut asc = vec![0.0; support_cutoff];
    let mut asc_total = 0.0;
    let mut nu2 = vec![0.0; support_cutoff + 1];
    let mut f = vec![0.0; support_cutoff + 1];
    f[0] = 1.0;
    let mut next = vec![0.0; support_cutoff + 1];
    for _ in 0..step_cutoff {
        for (n, &m) in f.iter().enumerate() {
            nu2[n] += m;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for (n, &m) in f.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let x = -(n as i64);
            for (h, slot) in asc.iter_mut().enumerate() {
                *slot += m * kern.get(h as i64 + 1 - x);
            }
            asc_total += m * upper_tail(w, 1 - x);
            for (k, slot) in next.iter_mut().enumerate() {
                *slot += m * kern.get(-(k as i64) - x);
            }
        }
        std::mem::swap(&mut f, &mut next);
    }

    // Weak descending: states 1, ..., L (position n - 1 is level n); nu1(0) = 1.
    let mut desc = vec![0.0; support_cutoff + 1];
    let mut desc_total = 0.0;
    let mut nu1 = vec![0.0; support_cutoff + 1];
    nu1[0] = 1.0;
    for (i, slot) in desc.iter_mut().enumerate() {
        *slot += kern.get(-(i as i64));
    }
    desc_total += lower_tail(w, 0);
    let mut g: Vec<f64> = (1..=l).map(|x| kern.get(x)).collect();
    let mut next = vec![0.0; support_cutoff];
    for _ in 1..step_cutoff {
        for (n, &m) in g.iter().enumerate() {
            nu1[n + 1] += m;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for (n, &m) in g.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let x = n as i64 + 1;
            for (i, slot) in desc.iter_mut().enumerate() {
                *slot += m * kern.get(-(i as i64) - x);
            }
            desc_total += m * lower_tail(w, -x);
            for (k, slot) in next.iter_mut().enumerate() {
                *slot += m * kern.get(k as i64 + 1 - x);
            }
        }
        std::mem::swap(&mut g, &mut next);
    }

    let desc_weak = GeomTail::finite(desc)?;
    let asc_strict = GeomTail::finite(asc)?;
    let desc_deficit = (1.0 - desc_total).max(0.0);
    let asc_deficit = (1.0 - asc_total).max(0.0);
    let residual = factor_residual(w, &desc_weak, &asc_strict, support_cutoff as i64 / 2);
    Ok(LadderFactor {
        method: LadderMethod::Dp,
        low_mass_warning: desc_total < 0.5 || asc_total < 0.5,
        desc_weak,
        asc_strict,
        desc_deficit,
        asc_deficit,
        nu1,
        nu2,
        dp_step_cutoff: Some(step_cutoff),
        dp_support_cutoff: Some(support_cutoff),
        residual,
        degenerate: false,
    })
}

pub(crate) fn degenerate_factor(
    w: &TwoSidedPmf,
    steps: Option<usize>,
    support: Option<usize>,
) -> LadderFactor {
    // The walk never moves: the weak descending height is 0 at the first step and
    // there is no ascending ladder epoch.
    LadderFactor {
        method: if steps.is_some() {
            LadderMethod::Dp
        } else {
            LadderMethod::Exact
        },
        desc_weak: GeomTail {
            values: vec![w.zero],
            ratio: None,
        },
        asc_strict: GeomTail::zero(),
        desc_deficit: 1.0 - w.zero,
        asc_deficit: 1.0,
        nu1: vec![1.0],
        nu2: Vec::new(),
        dp_step_cutoff: steps,
        dp_support_cutoff: support,
        residual: 0.0,
        low_mass_warning: false,
        degenerate: true,
    }
}

/// Coefficient-wise residual of `delta_0 - w = (delta_0 - H-) * (delta_0 - H+)` on `[-window, window]`.
pub(crate) fn factor_residual(
    w: &TwoSidedPmf,
    desc: &GeomTail,
    asc: &GeomTail,
    window: i64,
) -> f64 {
    let reach = |t: &GeomTail| t.effective_len(1e-18).max(t.head_len()) as i64 + 1;
    let (rd, ra) = (reach(desc), reach(asc));
    let dm = |x: i64| if x > 0 { 0.0 } else { desc.get((-x) as usize) };
    let am = |x: i64| if x < 1 { 0.0 } else { asc.get(x as usize - 1) };
    let mut worst = 0.0f64;
    for x in -window..=window {
        // (delta - D) * (delta - A) = delta - D - A + D * A
        let mut conv = 0.0;
        for y in 1..=ra {
            let z = x - y;
            if z <= 0 && -z <= rd {
                conv += am(y) * dm(z);
            }
        }
        let lhs = if x == 0 { 1.0 } else { 0.0 } - w.get(x);
        let rhs = if x == 0 { 1.0 } else { 0.0 } - dm(x) - am(x) + conv;
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// `max_i |H-(i) - sum_n w(i - n) nu1(n)|` and the ascending analogue over the
/// stored part of each ladder law.
pub fn structural_identity_residual(w: &TwoSidedPmf, lf: &LadderFactor) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..lf.desc_weak.head_len() {
        let x = -(i as i64);
        let s: f64 = lf
            .nu1
            .iter()
            .enumerate()
            .map(|(n, v)| w.get(x - n as i64) * v)
            .sum();
        worst = worst.max((lf.desc_at(x) - s).abs());
    }
    for i in 0..lf.asc_strict.head_len() {
        let x = i as i64 + 1;
        let s: f64 = lf
            .nu2
            .iter()
            .enumerate()
            .map(|(n, v)| w.get(x + n as i64) * v)
            .sum();
        worst = worst.max((lf.asc_at(x) - s).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ssrw() -> TwoSidedPmf {
        TwoSidedPmf::new(
            GeomTail::finite(vec![0.5]).unwrap(),
            0.0,
            GeomTail::finite(vec![0.5]).unwrap(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn dp_deficit_decreases_with_steps() {
        let w = ssrw();
        let mut last = 1.0;
        for steps in [1, 5, 25, 125] {
            let lf = ladder_heights_dp(&w, steps, 200).unwrap();
            assert!(lf.max_deficit() <= last);
            last = lf.max_deficit();
        }
        // P{T > n} ~ sqrt(2 / (pi n)) for the first ascending epoch.
        assert!(last > 0.05);
    }

    #[test]
    fn dp_simple_walk_first_steps() {
        let lf = ladder_heights_dp(&ssrw(), 3, 10).unwrap();
        // Ascending: up at step 1 (1/2) or down-up-up (1/8).
        assert!((lf.asc_at(1) - 0.625).abs() < 1e-15);
        assert_eq!(lf.asc_at(2), 0.0);
        // Descending: down at step 1 (1/2) or up-down (1/4).
        assert!((lf.desc_at(-1) - 0.5).abs() < 1e-15);
        assert!((lf.desc_at(0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dp_structural_identity() {
        let w = ssrw();
        let lf = ladder_heights_dp(&w, 40, 60).unwrap();
        assert!(structural_identity_residual(&w, &lf) < 1e-14);
    }

    #[test]
    fn degenerate_walk_is_flagged() {
        let lf = ladder_heights_dp(&TwoSidedPmf::degenerate(), 10, 10).unwrap();
        assert!(lf.degenerate);
        assert_eq!(lf.desc_at(0), 1.0);
    }

    #[test]
    fn tails_of_simple_walk_factor() {
        let lf = LadderFactor {
            method: LadderMethod::Exact,
            desc_weak: GeomTail::finite(vec![0.5, 0.5]).unwrap(),
            asc_strict: GeomTail::finite(vec![1.0]).unwrap(),
            desc_deficit: 0.0,
            asc_deficit: 0.0,
            nu1: vec![],
            nu2: vec![],
            dp_step_cutoff: None,
            dp_support_cutoff: None,
            residual: 0.0,
            low_mass_warning: false,
            degenerate: false,
        };
        let t = factor_tails(&lf, 1e-6).unwrap();
        assert_eq!(t.tails2.materialize(3), vec![1.0, 0.0, 0.0]);
        assert_eq!(t.tails1.materialize(3), vec![0.5, 0.0, 0.0]);
        assert!(factor_residual(&ssrw(), &lf.desc_weak, &lf.asc_strict, 5) < 1e-15);
        let mut bad = lf.clone();
        bad.asc_deficit = 0.1;
        assert!(factor_tails(&bad, 1e-6).is_err());
    }
}
