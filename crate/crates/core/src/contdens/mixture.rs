use serde::{Deserialize, Serialize};

use super::family::{check_atoms, FnHandle, MeasureFn};
use crate::error::{input, Result};

/// `v_r(y) = sum_i w_i rate_i^2 e^{-rate_i y}` for the two halves of a mixing measure
/// whose atoms `(rate, w)` have total weight 1 across both sides.
pub fn exp_mixture_density(mu1: &[(f64, f64)], mu2: &[(f64, f64)]) -> Result<(FnHandle, FnHandle)> {
    let all: Vec<(f64, f64)> = mu1.iter().chain(mu2).copied().collect();
    for &(rate, w) in &all {
        if !(rate > 0.0 && rate.is_finite()) {
            return input(format!("rate must be positive, got {rate}"));
        }
        if !(w > 0.0) {
            return input(format!("weight must be positive, got {w}"));
        }
    }
    check_atoms(&all, "mixing measure")?;
    let v = |mu: &[(f64, f64)]| {
        FnHandle::exp_mixture(mu.iter().map(|&(r, w)| (r, w * r * r)).collect())
    };
    Ok((v(mu1)?, v(mu2)?))
}

/// `H(x) = E G(x V)` for `x >= a`, with `V` given by atoms `(v, w)`.
pub fn scale_mixture_h(g: &MeasureFn, v_atoms: &[(f64, f64)], a: f64) -> Result<MeasureFn> {
    if !(a >= 0.0 && a.is_finite()) {
        return input(format!("a must be finite and nonnegative, got {a}"));
    }
    check_atoms(v_atoms, "scale variable")?;
    for &(v, _) in v_atoms {
        if a > 0.0 && v < 1.0 {
            return input(format!(
                "scale atom {v} < 1 is not allowed when a = {a} > 0"
            ));
        }
        if a == 0.0 && v <= 0.0 {
            return input(format!("scale atom {v} must be positive"));
        }
    }
    Ok(MeasureFn::ScaleMixture {
        a,
        base: Box::new(g.clone()),
        atoms: v_atoms.to_vec(),
    })
}

/// Values of `h_b(x) = sum_{y_i <= b} w_i g(x + y_i)` for increasing truncation bounds `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneConvergence {
    pub bounds: Vec<f64>,
    pub grid: Vec<f64>,
    /// `values[k][i] = h_{bounds[k]}(grid[i])`.
    pub values: Vec<Vec<f64>>,
    pub full: Vec<f64>,
    pub nondecreasing: bool,
    /// `max_i |h_{b_last}(x_i) - h(x_i)|`.
    pub final_gap: f64,
}

/// Truncates the shift-mixing measure `sum w_i delta_{y_i}` at each bound and
/// evaluates the resulting mixtures of `g` on `grid`.
pub fn shift_mixture_truncations(
    g: &FnHandle,
    atoms: &[(f64, f64)],
    bounds: &[f64],
    grid: &[f64],
) -> Result<MonotoneConvergence> {
    for &(y, w) in atoms {
        if !(y >= 0.0 && w >= 0.0) {
            return input(format!("shift atom ({y}, {w}) must have y >= 0 and w >= 0"));
        }
    }
    if bounds.windows(2).any(|b| b[1] < b[0]) {
        return input("truncation bounds must be nondecreasing");
    }
    let h = |b: f64, x: f64| -> f64 {
        atoms
            .iter()
            .filter(|a| a.0 <= b)
            .map(|&(y, w)| w * g.eval(x + y))
            .sum()
    };
    let values: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&b| grid.iter().map(|&x| h(b, x)).collect())
        .collect();
    let full: Vec<f64> = grid.iter().map(|&x| h(f64::INFINITY, x)).collect();
    let nondecreasing = values
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b))
        && values
            .last()
            .is_none_or(|last| last.iter().zip(&full).all(|(a, b)| a <= b));
    let final_gap = values
        .last()
        .map(|last| {
            last.iter()
                .zip(&full)
                .map(|(a, b)| (b - a).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    Ok(MonotoneConvergence {
        bounds: bounds.to_vec(),
        grid: grid.to_vec(),
        values,
        full,
        nondecreasing,
        final_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_is_log_linear() {
        let (v1, v2) = exp_mixture_density(&[], &[(2.0, 1.0)]).unwrap();
        assert_eq!(v1.eval(0.3), 0.0);
        assert!((v2.eval(0.5) - 4.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(v2.differential_log_convexity(&[0.5, 1.0, 2.0], 1e-4).abs() < 1e-6);
    }

    #[test]
    fn two_atoms_satisfy_the_differential_inequality() {
        let (_, v) = exp_mixture_density(&[], &[(1.0, 0.5), (3.0, 0.5)]).unwrap();
        let grid: Vec<f64> = (1..200).map(|i| i as f64 * 0.05).collect();
        assert!(v.differential_log_convexity(&grid, 1e-4) >= -1e-8);
        assert!(v.grid_log_convexity(0.05, 0.05, 200, 1e-9).unwrap().verdict);
    }

    #[test]
    fn mixture_validation() {
        assert!(exp_mixture_density(&[(0.0, 0.5)], &[(1.0, 0.5)]).is_err());
        assert!(exp_mixture_density(&[(1.0, 0.5)], &[(1.0, 0.4)]).is_err());
    }

    #[test]
    fn identity_scale_mixture() {
        let g = MeasureFn::exp_df(0.0, 1.0, 0.0).unwrap();
        let h = scale_mixture_h(&g, &[(1.0, 1.0)], 0.0).unwrap();
        for x in [0.0, 0.5, 3.0] {
            assert_eq!(h.eval(x).unwrap(), g.eval(x).unwrap());
            assert_eq!(h.derivative(x + 0.1), g.derivative(x + 0.1));
        }
        assert!(scale_mixture_h(&g, &[(0.5, 1.0)], 0.5).is_err());
        assert!(scale_mixture_h(&g, &[(0.5, 1.0)], 0.0).is_ok());
    }

    #[test]
    fn truncations_increase_to_the_full_mixture() {
        let g = FnHandle::exponential(1.0, 1.0).unwrap();
        let atoms: Vec<(f64, f64)> = (0..30)
            .map(|k| (k as f64 * 0.5, 0.5f64.powi(k + 1)))
            .collect();
        let grid = [0.1, 0.5, 1.0, 4.0];
        let m = shift_mixture_truncations(&g, &atoms, &[1.0, 2.0, 5.0, 20.0], &grid).unwrap();
        assert!(m.nondecreasing);
        assert!(m.final_gap < 1e-12);
    }
}
