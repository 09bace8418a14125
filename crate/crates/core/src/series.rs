//! Truncated formal power series arithmetic.

use crate::error::{Error, Result};

/// Coefficients `a_0, a_1, ..., a_{n-1}` of a truncated power series.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries(pub Vec<f64>);

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    fn at(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }

    /// Product truncated to `n` coefficients.
    pub fn mul_trunc(&self, other: &Self, n: usize) -> Self {
        let mut out = vec![0.0; n];
        for (i, &a) in self.0.iter().enumerate().take(n) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    /// Quotient `self / other` truncated to `n` coefficients.
    pub fn div_trunc(&self, other: &Self, n: usize) -> Result<Self> {
        let d0 = other.at(0);
        if d0 == 0.0 {
            return Err(Error::Domain(
                "series division by a series with zero constant term".into(),
            ));
        }
        let mut q = vec![0.0; n];
        for k in 0..n {
            let acc: f64 = (1..=k.min(other.len().saturating_sub(1)))
                .map(|j| other.0[j] * q[k - j])
                .sum();
            q[k] = (self.at(k) - acc) / d0;
        }
        Ok(Self(q))
    }

    pub fn derivative(&self) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| k as f64 * a)
                .collect(),
        )
    }

    /// Antiderivative with the given constant term.
    pub fn integral(&self, constant: f64) -> Self {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(constant);
        out.extend(self.0.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        Self(out)
    }

    /// `log` of the series to order `n_max` (coefficients `0..=n_max`).
    ///
    /// Computed as `log a = log a_0 + integral(a' / a)`: one series division
    /// followed by term-wise integration.
    pub fn log(&self, n_max: usize) -> Result<Self> {
        let a0 = self.at(0);
        if !(a0 > 0.0) {
            return Err(Error::Domain(format!(
                "log needs a positive constant term, got {a0}"
            )));
        }
        let quotient = self.derivative().div_trunc(self, n_max)?;
        let mut out = quotient.integral(a0.ln()).0;
        out.truncate(n_max + 1);
        Ok(Self(out))
    }

    /// `exp` of the series to order `n_max`, by the recursion `n e_n = sum k b_k e_{n-k}`.
    pub fn exp(&self, n_max: usize) -> Self {
        let mut e = vec![0.0; n_max + 1];
        e[0] = self.at(0).exp();
        for n in 1..=n_max {
            let acc: f64 = (1..=n).map(|k| k as f64 * self.at(k) * e[n - k]).sum();
            e[n] = acc / n as f64;
        }
        Self(e)
    }
}

/// Truncated log of a power series; see [`PowerSeries::log`].
pub fn series_log(coeffs: &[f64], n_max: usize) -> Result<Vec<f64>> {
    Ok(PowerSeries::new(coeffs.to_vec()).log(n_max)?.0)
}

/// Truncated exp of a power series; see [`PowerSeries::exp`].
pub fn series_exp(coeffs: &[f64], n_max: usize) -> Vec<f64> {
    PowerSeries::new(coeffs.to_vec()).exp(n_max).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_of_geometric_series() {
        let rho: f64 = 0.7;
        let a: Vec<f64> = (0..40).map(|k| rho.powi(k)).collect();
        let l = series_log(&a, 30).unwrap();
        assert_eq!(l.len(), 31);
        assert!(l[0].abs() < 1e-15);
        for (x, lx) in l.iter().enumerate().skip(1) {
            let expected = rho.powi(x as i32) / x as f64;
            assert!((lx - expected).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn log_of_one_is_zero() {
        let l = series_log(&[1.0, 0.0, 0.0, 0.0], 3).unwrap();
        assert!(l.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn log_rejects_nonpositive_constant() {
        assert!(series_log(&[0.0, 1.0], 3).is_err());
        assert!(series_log(&[-1.0, 1.0], 3).is_err());
    }

    #[test]
    fn division_matches_known_inverse() {
        let one_minus = PowerSeries::new(vec![1.0, -0.5]);
        let inv = PowerSeries::new(vec![1.0])
            .div_trunc(&one_minus, 6)
            .unwrap();
        for (k, c) in inv.0.iter().enumerate() {
            assert!((c - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn exp_inverts_log(a0 in 0.1f64..3.0, rest in proptest::collection::vec(-1.0f64..1.0, 1..25)) {
            let mut a = vec![a0];
            a.extend(rest.iter().map(|c| c * a0 * 0.5));
            let n = a.len() - 1;
            let back = series_exp(&series_log(&a, n).unwrap(), n);
            let scale = a.iter().fold(1.0f64, |m, c| m.max(c.abs()));
            for k in 0..=n {
                prop_assert!((back[k] - a[k]).abs() <= 1e-10 * scale, "k={} {} vs {}", k, back[k], a[k]);
            }
        }
    }
}
