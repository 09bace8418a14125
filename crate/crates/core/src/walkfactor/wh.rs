//! Exact Wiener-Hopf factorization for increment laws whose tails are finite or
//! eventually geometric.
//!
//! With `bP`, `bN` the continuation ratios of the positive and negative sides,
//! `(1 - bP s)(1 - bN / s)(1 - W(s))` is a Laurent polynomial. Multiplied by
//! `s^mN` it becomes a polynomial `P` with a double root at `s = 1` (mean zero).
//! Its roots outside the unit disk belong to `1 - H+`, those inside to `1 - H-`:
//!
//! ```text
//! 1 - H+(s) = Q+(s) / (1 - bP s),   Q+(s) = (1 - s) prod_{|r| > 1} (1 - s / r)
//! 1 - H-(s) = s^-mN Q-(s) / (1 - bN / s),   Q- = P / Q+
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ladder::{factor_residual, LadderFactor, LadderMethod};
use super::law::TwoSidedPmf;
use crate::error::{Error, Result};
use crate::seq::GeomTail;

const MEAN_TOL: f64 = 1e-10;
const UNIT_GAP: f64 = 1e-9;

/// Ladder-height laws of the walk with increments `w` by polynomial spectral factorization.
pub fn wiener_hopf_factor(w: &TwoSidedPmf) -> Result<LadderFactor> {
    if w.is_degenerate() {
        return Ok(super::ladder::degenerate_factor(w, None, None));
    }
    if w.mass_deficit > 1e-12 {
        return Err(Error::Input(
            "factorization needs an untruncated increment law".into(),
        ));
    }
    if w.neg.is_zero() || w.pos.is_zero() {
        return Err(Error::Precondition(
            "a one-sided increment law cannot have mean zero".into(),
        ));
    }
    let mean = w.mean();
    if mean.abs() > MEAN_TOL {
        return Err(Error::Precondition(format!(
            "increment law has mean {mean:.3e}, not 0"
        )));
    }

    let neg = w.neg.clone().compact(1e-14);
    let pos = w.pos.clone().compact(1e-14);
    let (mn, bn) = (neg.head_len(), neg.ratio_or_zero());
    let (mp, bp) = (pos.head_len(), pos.ratio_or_zero());

    let p = driver_polynomial(w.zero, &neg, &pos);
    let (p1, rem1) = deflate_unit(&p);
    let (p2, rem2) = deflate_unit(&p1);
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if rem1.abs() > 1e-10 * scale || rem2.abs() > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "expected a double root at 1; remainders {rem1:.3e}, {rem2:.3e}"
        )));
    }

    let roots: Vec<Complex64> = polynomial_roots(&p2)?
        .into_iter()
        .map(|z| polish(&p, z))
        .collect();
    let mut outside = Vec::new();
    for r in &roots {
        let m = r.norm();
        if (m - 1.0).abs() < UNIT_GAP {
            return Err(Error::Domain(format!(
                "root {r} lies on the unit circle; periodic increment laws are not supported"
            )));
        }
        if m > 1.0 {
            outside.push(*r);
        }
    }

    // prod (1 - s / r) over the outside roots, real up to rounding.
    let mut pi = vec![Complex64::new(1.0, 0.0)];
    for r in &outside {
        let inv = -1.0 / r;
        let mut next = vec![Complex64::new(0.0, 0.0); pi.len() + 1];
        for (k, c) in pi.iter().enumerate() {
            next[k] += c;
            next[k + 1] += c * inv;
        }
        pi = next;
    }
    let pi: Vec<f64> = pi.iter().map(|c| c.re).collect();
    let (pi, rin) = refine_split(&p2, pi);
    let mut q_plus = vec![0.0; pi.len() + 1];
    for (k, c) in pi.iter().enumerate() {
        q_plus[k] += c;
        q_plus[k + 1] -= c;
    }

    // Q- = P / Q+ = (1 - s) R with R = P2 / pi.
    let len = rin.len() + 1;
    let mut q_minus = vec![0.0; len];
    for (k, c) in rin.iter().enumerate() {
        q_minus[k] += c;
        q_minus[k + 1] -= c;
    }
    let mut back_err = 0.0f64;
    for k in 0..p1.len().max(len + pi.len() - 1) {
        let prod: f64 = (0..=k)
            .filter(|&j| j < pi.len() && k - j < len)
            .map(|j| pi[j] * q_minus[k - j])
            .sum();
        back_err = back_err.max((prod + p1.get(k).copied().unwrap_or(0.0)).abs());
    }
    if back_err > 1e-9 * scale {
        return Err(Error::Numerical(format!(
            "spectral factor division left a remainder of {back_err:.3e}"
        )));
    }
    if q_minus.iter().skip(mn + 1).any(|c| c.abs() > 1e-9 * scale) {
        return Err(Error::Numerical(
            "descending factor has positive powers; root classification failed".into(),
        ));
    }

    // 1 - H-(z) = R(z) / (1 - bN z) with R_i = Q-_{mN - i}.
    let r: Vec<f64> = (0..=mn)
        .map(|i| q_minus.get(mn - i).copied().unwrap_or(0.0))
        .collect();
    let desc_vals = expand_rational(&r, bn, mn + 1);
    let mut desc: Vec<f64> = desc_vals.iter().map(|c| -c).collect();
    desc[0] += 1.0;
    let asc_vals = expand_rational(&q_plus, bp, q_plus.len());
    let asc: Vec<f64> = asc_vals.iter().skip(1).map(|c| -c).collect();

    let desc_weak = nonneg_tail(desc, bn, "descending")?;
    let asc_strict = nonneg_tail(asc, bp, "ascending")?;
    let desc_mass = desc_weak.total();
    let asc_mass = asc_strict.total();
    if (desc_mass - 1.0).abs() > 1e-8 || (asc_mass - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "ladder laws have masses {desc_mass} and {asc_mass}, not 1"
        )));
    }

    let window = (mn.max(mp) + 12) as i64;
    let residual = factor_residual(w, &desc_weak, &asc_strict, window);
    let nu_len =
        (neg.effective_len(1e-18).max(pos.effective_len(1e-18)) + mn.max(mp) + 4).min(20_000);
    let nu1 = renewal_measure(&asc_strict, 0.0, nu_len);
    let nu2 = renewal_measure(
        &desc_weak.clone().tail_sums(1).differences(),
        desc_weak.get(0),
        nu_len,
    );
    Ok(LadderFactor {
        method: LadderMethod::Exact,
        desc_deficit: (1.0 - desc_mass).abs(),
        asc_deficit: (1.0 - asc_mass).abs(),
        desc_weak,
        asc_strict,
        nu1,
        nu2,
        dp_step_cutoff: None,
        dp_support_cutoff: None,
        residual,
        low_mass_warning: false,
        degenerate: false,
    })
}

/// `s^mN (1 - bP s)(1 - bN / s)(1 - W(s))` as ascending coefficients.
fn driver_polynomial(w0: f64, neg: &GeomTail, pos: &GeomTail) -> Vec<f64> {
    let (mn, bn) = (neg.head_len(), neg.ratio_or_zero());
    let (mp, bp) = (pos.head_len(), pos.ratio_or_zero());
    let lin = |t: &GeomTail, b: f64| -> Vec<f64> {
        // coefficients of (1 - b x) sum_{j >= 1} t_j x^j, degree <= head length
        (0..=t.head_len())
            .map(|j| {
                if j == 0 {
                    0.0
                } else {
                    t.get(j - 1) - if j >= 2 { b * t.get(j - 2) } else { 0.0 }
                }
            })
            .collect()
    };
    let lpos = lin(pos, bp);
    let lneg = lin(neg, bn);
    let hi = mp.max(1) as i64 + 1;
    let lo = -(mn as i64) - 1;
    let mut a = vec![0.0; (hi - lo + 1) as usize];
    let mut add = |e: i64, v: f64| a[(e - lo) as usize] += v;
    // (1 - w0)(1 - bP s)(1 - bN / s) = (1 - w0)(1 + bP bN - bP s - bN / s)
    let c = 1.0 - w0;
    add(0, c * (1.0 + bp * bn));
    add(1, -c * bp);
    add(-1, -c * bn);
    // -(1 - bN / s) Lpos(s)
    for (j, &l) in lpos.iter().enumerate() {
        add(j as i64, -l);
        add(j as i64 - 1, bn * l);
    }
    // -(1 - bP s) Lneg(1 / s)
    for (j, &l) in lneg.iter().enumerate() {
        add(-(j as i64), -l);
        add(1 - j as i64, bp * l);
    }
    let shift = (-(mn as i64) - lo) as usize;
    debug_assert!(a[..shift].iter().all(|&x| x.abs() < 1e-15));
    let mut p: Vec<f64> = a[shift..].to_vec();
    while p.len() > 1 && p.last() == Some(&0.0) {
        p.pop();
    }
    p
}

/// Divides by `(s - 1)`; returns quotient and remainder.
fn deflate_unit(a: &[f64]) -> (Vec<f64>, f64) {
    let d = a.len() - 1;
    if d == 0 {
        return (vec![0.0], a[0]);
    }
    let mut b = vec![0.0; d];
    b[d - 1] = a[d];
    for k in (1..d).rev() {
        b[k - 1] = a[k] + b[k];
    }
    (b.clone(), a[0] + b[0])
}

/// Roots of the polynomial with ascending coefficients `a`, polished by Newton steps.
fn polynomial_roots(a: &[f64]) -> Result<Vec<Complex64>> {
    let mut a = a.to_vec();
    while a.len() > 1 && a.last() == Some(&0.0) {
        a.pop();
    }
    let d = a.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = a[d];
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        m[(i, d - 1)] = -a[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let horner = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in a.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let mut roots = Vec::with_capacity(d);
    for &z0 in eig.iter() {
        if !(z0.re.is_finite() && z0.im.is_finite()) {
            return Err(Error::Numerical(
                "eigenvalue solver returned a non-finite root".into(),
            ));
        }
        let mut z = z0;
        let mut best = horner(z).0.norm();
        for _ in 0..8 {
            let (p, dp) = horner(z);
            if dp.norm() == 0.0 {
                break;
            }
            let cand = z - p / dp;
            let val = horner(cand).0.norm();
            if val < best {
                z = cand;
                best = val;
            } else {
                break;
            }
        }
        roots.push(z);
    }
    Ok(roots)
}

/// `a / d` by ascending division, `d(0) = 1`, keeping `len` coefficients.
fn ascending_div(a: &[f64], d: &[f64], len: usize) -> Vec<f64> {
    let mut q = vec![0.0; len];
    for k in 0..len {
        let acc: f64 = (1..=k.min(d.len() - 1)).map(|j| d[j] * q[k - j]).sum();
        q[k] = a.get(k).copied().unwrap_or(0.0) - acc;
    }
    q
}

fn mul_err(a: &[f64], pi: &[f64], r: &[f64]) -> Vec<f64> {
    let n = a.len().max(pi.len() + r.len() - 1);
    let mut e: Vec<f64> = (0..n).map(|k| a.get(k).copied().unwrap_or(0.0)).collect();
    for (i, x) in pi.iter().enumerate() {
        for (j, y) in r.iter().enumerate() {
            e[i + j] -= x * y;
        }
    }
    e
}

/// Splits `a = pi * r` with `pi(0) = 1`, starting from `pi` and refining both factors by
/// Newton steps on the coefficient equations. The factors have disjoint roots, so the
/// linearized system is nonsingular.
fn refine_split(a: &[f64], pi: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let d1 = pi.len() - 1;
    if a.len() <= d1 {
        return (pi, vec![0.0]);
    }
    let d2 = a.len() - 1 - d1;
    let mut pi = pi;
    let mut r = ascending_div(a, &pi, d2 + 1);
    let norm = |e: &[f64]| e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut best = norm(&mul_err(a, &pi, &r));
    let n = a.len();
    for _ in 0..4 {
        if best == 0.0 {
            break;
        }
        let e = mul_err(a, &pi, &r);
        // Unknowns: dpi_1..dpi_d1, dr_0..dr_d2; equations: coefficients 0..n-1.
        let mut m = DMatrix::<f64>::zeros(n, n);
        for col in 0..d1 {
            for (j, y) in r.iter().enumerate() {
                m[(col + 1 + j, col)] += y;
            }
        }
        for col in 0..=d2 {
            for (i, x) in pi.iter().enumerate() {
                m[(col + i, d1 + col)] += x;
            }
        }
        let Some(x) = m.lu().solve(&nalgebra::DVector::from_vec(e[..n].to_vec())) else {
            break;
        };
        let cand_pi: Vec<f64> = (0..=d1)
            .map(|k| pi[k] + if k == 0 { 0.0 } else { x[k - 1] })
            .collect();
        let cand_r: Vec<f64> = (0..=d2).map(|k| r[k] + x[d1 + k]).collect();
        let val = norm(&mul_err(a, &cand_pi, &cand_r));
        if val < best {
            pi = cand_pi;
            r = cand_r;
            best = val;
        } else {
            break;
        }
    }
    (pi, r)
}

/// Newton steps against the undeflated polynomial, kept while the residual shrinks.
fn polish(a: &[f64], z0: Complex64) -> Complex64 {
    let horner = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in a.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let mut z = z0;
    let mut best = horner(z).0.norm();
    for _ in 0..8 {
        let (p, dp) = horner(z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let val = horner(cand).0.norm();
        if val < best {
            z = cand;
            best = val;
        } else {
            break;
        }
    }
    z
}

/// First `head` coefficients of `N(x) / (1 - b x)`; later ones follow with ratio `b`.
fn expand_rational(num: &[f64], b: f64, head: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(head);
    let mut prev = 0.0;
    for k in 0..head {
        let c = num.get(k).copied().unwrap_or(0.0) + b * prev;
        out.push(c);
        prev = c;
    }
    out
}

fn nonneg_tail(vals: Vec<f64>, ratio: f64, name: &str) -> Result<GeomTail> {
    if let Some((i, v)) = vals.iter().enumerate().find(|(_, v)| **v < -1e-10) {
        return Err(Error::Numerical(format!(
            "{name} ladder law has negative mass {v:.3e} at position {i}"
        )));
    }
    let vals: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
    let ratio = (ratio > 0.0 && vals.last().is_some_and(|&v| v > 0.0)).then_some(ratio);
    Ok(GeomTail::new(vals, ratio)?.compact(1e-14))
}

/// Renewal measure `U = sum_k F^{*k}` for a law `f` on `{1, 2, ...}` (position `i`
/// is `i + 1`) mixed with an atom `f0` at 0: `U(n)(1 - f0) = [n = 0] + sum_k f_k U(n - k)`.
fn renewal_measure(f: &GeomTail, f0: f64, len: usize) -> Vec<f64> {
    let inv = 1.0 / (1.0 - f0);
    let fv = f.materialize(len);
    let mut u = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = if n == 0 { 1.0 } else { 0.0 };
        for k in 1..=n {
            acc += fv[k - 1] * u[n - k];
        }
        u.push(acc * inv);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::super::ladder::structural_identity_residual;
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
    fn simple_walk_factor() {
        let lf = wiener_hopf_factor(&ssrw()).unwrap();
        assert!((lf.desc_at(0) - 0.5).abs() < 1e-14);
        assert!((lf.desc_at(-1) - 0.5).abs() < 1e-14);
        assert!((lf.asc_at(1) - 1.0).abs() < 1e-14);
        assert!(lf.asc_at(2).abs() < 1e-14);
        assert!(lf.residual < 1e-14);
        assert!(structural_identity_residual(&ssrw(), &lf) < 1e-12);
    }

    #[test]
    fn lazy_asymmetric_walk() {
        // Steps -1 w.p. 1/2, 0 w.p. 1/4 and +2 w.p. 1/4: mean 0.
        let w = TwoSidedPmf::new(
            GeomTail::finite(vec![0.5]).unwrap(),
            0.25,
            GeomTail::finite(vec![0.0, 0.25]).unwrap(),
            0.0,
        )
        .unwrap();
        let lf = wiener_hopf_factor(&w).unwrap();
        assert!(lf.residual < 1e-12);
        assert!(structural_identity_residual(&w, &lf) < 1e-10);
        // Skip-free downward: the descending height lives on {0, -1}.
        assert!(lf.desc_at(-2).abs() < 1e-12);
        // Compare with a long DP run.
        let dp = super::super::ladder::ladder_heights_dp(&w, 4000, 200).unwrap();
        assert!((dp.asc_at(1) / (1.0 - dp.asc_deficit) - lf.asc_at(1)).abs() < 3e-2);
    }

    #[test]
    fn periodic_walk_is_rejected() {
        let w = TwoSidedPmf::new(
            GeomTail::finite(vec![0.0, 0.5]).unwrap(),
            0.0,
            GeomTail::finite(vec![0.0, 0.5]).unwrap(),
            0.0,
        )
        .unwrap();
        assert!(matches!(wiener_hopf_factor(&w), Err(Error::Domain(_))));
    }

    #[test]
    fn drifting_walk_is_rejected() {
        let w = TwoSidedPmf::new(
            GeomTail::finite(vec![0.25]).unwrap(),
            0.0,
            GeomTail::finite(vec![0.75]).unwrap(),
            0.0,
        )
        .unwrap();
        assert!(matches!(
            wiener_hopf_factor(&w),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn geometric_tails_factor() {
        let t = GeomTail::new(vec![0.2, 0.1], Some(0.5)).unwrap();
        let zero = 1.0 - 2.0 * t.total();
        let w = TwoSidedPmf::new(t.clone(), zero, t, 0.0).unwrap();
        let lf = wiener_hopf_factor(&w).unwrap();
        assert!(lf.residual < 1e-12, "residual {}", lf.residual);
        assert!(structural_identity_residual(&w, &lf) < 1e-10);
        assert_eq!(lf.asc_strict.ratio, Some(0.5));
    }
}
