//! Continuous constructions and their lattice approximations.
//!
//! Measure functions with log-convex derivative discretize to log-convex
//! increments; pairs of log-convex functions on `(0, inf)` define two-sided
//! tail-integral densities whose cell-averaged drivers feed the two-sided
//! certificate. Functions come from a small registry of parametric families
//! plus arbitrary closures, whose log-convexity is only checked on grids.

mod discretize;
mod family;
mod mixture;
mod quad;

pub use discretize::{
    discretize_corollary3, discretize_lemma2, lattice_cdf, tail_integral_density, Cor3Cutoffs,
    Lemma2Discretization, TailDensity,
};
pub use family::{bump_h, bump_h_prime, integrate_handle, CustomFn, Family, FnHandle, MeasureFn};
pub use mixture::{
    exp_mixture_density, scale_mixture_h, shift_mixture_truncations, MonotoneConvergence,
};
pub use quad::{integrate, integrate_pieces, integrate_to_inf, QuadConfig};
