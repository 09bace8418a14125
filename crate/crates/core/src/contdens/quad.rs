use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Adaptive Gauss-Kronrod settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Absolute error budget for the whole interval; each bisection halves it.
    pub abs_tol: f64,
    /// A panel is also accepted once its error estimate is this small relative to its value.
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-13,
            max_depth: 40,
        }
    }
}

/// One 15-point Kronrod panel: value and `|K15 - G7|`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `int_a^b f` by adaptive Gauss-Kronrod 7-15 bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "finite limits required, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, cfg).map(|v| -v);
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, cfg.abs_tol, 0usize)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        if err <= tol.max(cfg.rel_tol * v.abs()) {
            total += v;
            continue;
        }
        // A panel this deep whose error is negligible against the budget is kept.
        if depth >= cfg.max_depth && err <= 1e-3 * cfg.abs_tol {
            total += v;
            continue;
        }
        if depth >= cfg.max_depth {
            return Err(Error::Numerical(format!(
                "quadrature did not converge on [{lo}, {hi}]: error estimate {err:.3e}"
            )));
        }
        let mid = 0.5 * (lo + hi);
        stack.push((lo, mid, 0.5 * tol, depth + 1));
        stack.push((mid, hi, 0.5 * tol, depth + 1));
    }
    Ok(total)
}

/// Sum of [`integrate`] over consecutive pieces `[p_0, p_1], [p_1, p_2], ...`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<f64> {
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces,
        ..*cfg
    };
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], &piece_cfg))
        .sum()
}

/// `int_a^inf f` through `x = a + scale * u / (1 - u)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let g = |u: f64| {
        let d = 1.0 - u;
        let x = a + scale * u / d;
        let y = f(x);
        if y == 0.0 {
            0.0
        } else {
            y * scale / (d * d)
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadConfig::default();
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &cfg).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
        assert_eq!(integrate(|x| x, 1.0, 1.0, &cfg).unwrap(), 0.0);
        assert!((integrate(|x| x, 1.0, 0.0, &cfg).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn kink_and_infinite_range() {
        let cfg = QuadConfig::default();
        let v = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &cfg).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-9);
        let e = integrate_to_inf(|x: f64| (-2.0 * x).exp(), 1.0, 1.0, &cfg).unwrap();
        assert!((e - (-2.0f64).exp() / 2.0).abs() < 1e-12);
        let pieces = integrate_pieces(|x: f64| (x - 1.0).abs(), &[0.0, 1.0, 3.0], &cfg).unwrap();
        assert!((pieces - 2.5).abs() < 1e-13);
    }

    #[test]
    fn non_integrable_is_reported() {
        let cfg = QuadConfig::default();
        assert!(matches!(
            integrate(|x: f64| 1.0 / x, 0.0, 1.0, &cfg),
            Err(Error::Numerical(_))
        ));
        assert!(integrate_to_inf(|x: f64| 1.0 / (1.0 + x), 0.0, 1.0, &cfg).is_err());
    }
}
