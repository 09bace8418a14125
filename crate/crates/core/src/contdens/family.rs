use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quad::{integrate, integrate_pieces, integrate_to_inf, QuadConfig};
use crate::error::{input, Error, Result};
use crate::seq::NonnegSeq;
use crate::seqcheck::{is_log_convex, CheckReport};

/// Bump exponent `h(x) = (1 - x)^2` on `(0, 1)`, zero from 1 on.
pub fn bump_h(x: f64) -> f64 {
    if x > 0.0 && x < 1.0 {
        (1.0 - x) * (1.0 - x)
    } else {
        0.0
    }
}

/// Derivative of [`bump_h`] away from 0.
pub fn bump_h_prime(x: f64) -> f64 {
    if x > 0.0 && x < 1.0 {
        -2.0 * (1.0 - x)
    } else {
        0.0
    }
}

/// Arbitrary evaluable function; never serialized.
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Points where the function or its derivative may jump.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFn")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

fn one() -> f64 {
    1.0
}

/// Registry of parametric families on `(0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// `scale * e^{-rate x}`.
    Exponential {
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `sum_i c_i e^{-rate_i x}` from atoms `[rate, c]`.
    ExpMixture { atoms: Vec<(f64, f64)> },
    /// `scale * e^{-rate x + h(x)}` with the bump `h`.
    BumpExponential {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    #[serde(skip)]
    Custom(CustomFn),
}

/// Evaluable nonnegative function on `(domain_start, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HandleRepr")]
pub struct FnHandle {
    #[serde(flatten)]
    pub family: Family,
    pub domain_start: f64,
    pub declared_log_convex: bool,
}

#[derive(Deserialize)]
struct HandleRepr {
    #[serde(flatten)]
    family: Family,
    #[serde(default)]
    domain_start: f64,
    #[serde(default = "yes")]
    declared_log_convex: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<HandleRepr> for FnHandle {
    type Error = Error;

    fn try_from(r: HandleRepr) -> Result<Self> {
        let mut h = FnHandle::new(r.family)?;
        h.domain_start = r.domain_start;
        h.declared_log_convex = r.declared_log_convex;
        Ok(h)
    }
}

impl FnHandle {
    /// Validates parameters; every registry family is log-convex.
    pub fn new(family: Family) -> Result<Self> {
        let pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                input(format!("{name} must be positive and finite, got {x}"))
            }
        };
        let declared = match &family {
            Family::Exponential { rate, scale } | Family::BumpExponential { rate, scale } => {
                pos("rate", *rate)?;
                if !(*scale >= 0.0 && scale.is_finite()) {
                    return input(format!("scale must be nonnegative, got {scale}"));
                }
                true
            }
            Family::ExpMixture { atoms } => {
                for &(rate, c) in atoms {
                    pos("rate", rate)?;
                    pos("mixture weight", c)?;
                }
                true
            }
            Family::Custom(_) => false,
        };
        Ok(Self {
            family,
            domain_start: 0.0,
            declared_log_convex: declared,
        })
    }

    pub fn exponential(rate: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate, scale })
    }

    pub fn exp_mixture(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Family::ExpMixture { atoms })
    }

    pub fn bump_exponential(rate: f64, scale: f64) -> Result<Self> {
        Self::new(Family::BumpExponential { rate, scale })
    }

    /// Wraps a closure; log-convexity is only ever checked on grids.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breakpoints: Vec<f64>,
        declared_log_convex: bool,
    ) -> Self {
        Self {
            family: Family::Custom(CustomFn {
                name: name.into(),
                f: Arc::new(f),
                breakpoints,
            }),
            domain_start: 0.0,
            declared_log_convex,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate, scale } => scale * (-rate * x).exp(),
            Family::ExpMixture { atoms } => atoms.iter().map(|&(r, c)| c * (-r * x).exp()).sum(),
            Family::BumpExponential { rate, scale } => scale * (-rate * x + bump_h(x)).exp(),
            Family::Custom(c) => (c.f)(x),
        }
    }

    /// Decay rate of the slowest exponential component, used to scale infinite ranges.
    fn decay_scale(&self) -> f64 {
        let rate = match &self.family {
            Family::Exponential { rate, .. } | Family::BumpExponential { rate, .. } => *rate,
            Family::ExpMixture { atoms } => atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min),
            Family::Custom(_) => 1.0,
        };
        if rate.is_finite() {
            1.0 / rate
        } else {
            1.0
        }
    }

    /// Breakpoints of the integrand inside `(lo, hi)`.
    fn breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let inner: Vec<f64> = match &self.family {
            Family::BumpExponential { .. } => vec![1.0],
            Family::Custom(c) => c.breakpoints.clone(),
            _ => Vec::new(),
        };
        let mut pts = vec![lo];
        let mut inner: Vec<f64> = inner.into_iter().filter(|&b| b > lo && b < hi).collect();
        inner.sort_by(f64::total_cmp);
        pts.extend(inner);
        pts.push(hi);
        pts
    }

    /// `int_x^inf (y - x)^k f(y) dy` for `k = 0, 1`, closed form for exponential families.
    fn tail_moment(&self, x: f64, k: i32, cfg: &QuadConfig) -> Result<f64> {
        let closed = |r: f64, c: f64| c * (-r * x).exp() / r.powi(k + 1);
        match &self.family {
            Family::Exponential { rate, scale } => Ok(closed(*rate, *scale)),
            Family::ExpMixture { atoms } => Ok(atoms.iter().map(|&(r, c)| closed(r, c)).sum()),
            Family::BumpExponential { rate, scale } if x >= 1.0 => Ok(closed(*rate, *scale)),
            _ => {
                let g = |y: f64| (y - x).powi(k) * self.eval(y);
                let pts = self.breaks(x, f64::INFINITY);
                let mut total = 0.0;
                // Finite pieces up to the last breakpoint, then the infinite range.
                let last = pts[pts.len() - 2];
                if pts.len() > 2 {
                    total += integrate_pieces(g, &pts[..pts.len() - 1], cfg)?;
                }
                total += integrate_to_inf(g, last, self.decay_scale(), cfg)?;
                Ok(total)
            }
        }
    }

    /// `int_x^inf f(y) dy`.
    pub fn tail_integral(&self, x: f64, cfg: &QuadConfig) -> Result<f64> {
        self.tail_moment(x, 0, cfg)
    }

    /// `int_x^inf (y - x) f(y) dy`, the tail integral of the tail integral.
    pub fn second_tail_integral(&self, x: f64, cfg: &QuadConfig) -> Result<f64> {
        self.tail_moment(x, 1, cfg)
    }

    /// `int_0^h int_0^h f(x0 + y + z) dy dz`.
    pub fn double_cell_integral(&self, x0: f64, h: f64, cfg: &QuadConfig) -> Result<f64> {
        let closed = |r: f64, c: f64| {
            let s = -(-r * h).exp_m1() / r;
            c * (-r * x0).exp() * s * s
        };
        match &self.family {
            Family::Exponential { rate, scale } => Ok(closed(*rate, *scale)),
            Family::ExpMixture { atoms } => Ok(atoms.iter().map(|&(r, c)| closed(r, c)).sum()),
            Family::BumpExponential { rate, scale } if x0 >= 1.0 => Ok(closed(*rate, *scale)),
            _ => {
                // Triangular kernel of the sum of two uniforms on [0, h].
                let g = |s: f64| self.eval(x0 + s) * if s < h { s } else { 2.0 * h - s };
                let mut pts = self.breaks(x0, x0 + 2.0 * h);
                pts.push(x0 + h);
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                let local: Vec<f64> = pts.iter().map(|p| p - x0).collect();
                integrate_pieces(g, &local, cfg)
            }
        }
    }

    /// Samples `f` on `{start + i step}` and runs the sequence log-convexity test.
    pub fn grid_log_convexity(
        &self,
        start: f64,
        step: f64,
        n: usize,
        tol: f64,
    ) -> Result<CheckReport> {
        if start <= self.domain_start || !(step > 0.0) {
            return input(format!(
                "grid must lie inside ({}, inf) with positive step",
                self.domain_start
            ));
        }
        let values: Vec<f64> = (0..n).map(|i| self.eval(start + i as f64 * step)).collect();
        is_log_convex(&NonnegSeq::new(values)?, tol)
    }

    /// Smallest `(f f'' - f'^2) / f^2` over `grid` by central differences of step `h`.
    pub fn differential_log_convexity(&self, grid: &[f64], h: f64) -> f64 {
        grid.iter()
            .map(|&x| {
                let (a, b, c) = (self.eval(x - h), self.eval(x), self.eval(x + h));
                if b == 0.0 {
                    return 0.0;
                }
                let d1 = (c - a) / (2.0 * h);
                let d2 = (c - 2.0 * b + a) / (h * h);
                (b * d2 - d1 * d1) / (b * b)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn zero() -> f64 {
    0.0
}

/// Nondecreasing right-continuous function vanishing below `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureFn {
    /// `atom + (1 - atom)(1 - e^{-rate (x - a)})` for `x >= a`.
    ExpDf {
        #[serde(default = "zero")]
        a: f64,
        rate: f64,
        #[serde(default = "zero")]
        atom: f64,
    },
    /// `atom + int_a^x density` for `x >= a`.
    Integral {
        #[serde(default = "zero")]
        a: f64,
        #[serde(default = "zero")]
        atom: f64,
        density: FnHandle,
    },
    /// `sum_i w_i G(x v_i)` for `x >= a`.
    ScaleMixture {
        a: f64,
        base: Box<MeasureFn>,
        atoms: Vec<(f64, f64)>,
    },
}

impl MeasureFn {
    pub fn exp_df(a: f64, rate: f64, atom: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return input(format!("rate must be positive, got {rate}"));
        }
        if !(0.0..=1.0).contains(&atom) {
            return input(format!("atom must lie in [0, 1], got {atom}"));
        }
        Ok(MeasureFn::ExpDf { a, rate, atom })
    }

    pub fn domain_start(&self) -> f64 {
        match self {
            MeasureFn::ExpDf { a, .. }
            | MeasureFn::Integral { a, .. }
            | MeasureFn::ScaleMixture { a, .. } => *a,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < self.domain_start() {
            return Ok(0.0);
        }
        match self {
            MeasureFn::ExpDf { a, rate, atom } => {
                Ok(atom - (1.0 - atom) * (-rate * (x - a)).exp_m1())
            }
            MeasureFn::Integral { a, atom, .. } => Ok(atom + self.increment(*a, x - a)?),
            MeasureFn::ScaleMixture { base, atoms, .. } => {
                atoms.iter().map(|&(v, w)| Ok(w * base.eval(x * v)?)).sum()
            }
        }
    }

    /// `G(x + h) - G(x)` for `x >= a`, without cancellation where a closed form exists.
    pub fn increment(&self, x: f64, h: f64) -> Result<f64> {
        match self {
            MeasureFn::ExpDf { a, rate, atom } => {
                let x = x.max(*a);
                Ok((1.0 - atom) * (-rate * (x - a)).exp() * -(-rate * h).exp_m1())
            }
            MeasureFn::Integral { a, density, .. } => {
                let lo = x.max(*a);
                let hi = (x + h).max(*a);
                let pts = density.breaks(lo, hi);
                integrate_pieces(|y| density.eval(y), &pts, &QuadConfig::default())
            }
            MeasureFn::ScaleMixture { base, atoms, .. } => atoms
                .iter()
                .map(|&(v, w)| Ok(w * base.increment(x * v, h * v)?))
                .sum(),
        }
    }

    /// `G'(x)` for `x > a`.
    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.domain_start() {
            return 0.0;
        }
        match self {
            MeasureFn::ExpDf { a, rate, atom } => (1.0 - atom) * rate * (-rate * (x - a)).exp(),
            MeasureFn::Integral { density, .. } => density.eval(x),
            MeasureFn::ScaleMixture { base, atoms, .. } => atoms
                .iter()
                .map(|&(v, w)| w * v * base.derivative(x * v))
                .sum(),
        }
    }
}

/// Checks a finite atom list `[(point, weight)]` with positive weights summing to 1.
pub(crate) fn check_atoms(atoms: &[(f64, f64)], what: &str) -> Result<()> {
    if atoms.is_empty() {
        return input(format!("{what} has no atoms"));
    }
    for &(x, w) in atoms {
        if !(w > 0.0 && w.is_finite() && x.is_finite()) {
            return input(format!(
                "{what} atom ({x}, {w}) needs a finite point and positive weight"
            ));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        return input(format!("{what} weights sum to {total}, not 1"));
    }
    Ok(())
}

/// Convenience: `int_lo^hi f` for a handle, split at its breakpoints.
pub fn integrate_handle(f: &FnHandle, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64> {
    if hi.is_infinite() {
        return f.tail_integral(lo, cfg);
    }
    let pts = f.breaks(lo, hi);
    integrate_pieces(|y| f.eval(y), &pts, cfg).or_else(|_| integrate(|y| f.eval(y), lo, hi, cfg))
}
