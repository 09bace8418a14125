//! Certificates and counterexamples for infinite divisibility of laws built
//! from log-convex sequences and densities.
//!
//! * [`seqcheck`]: log-convex, Kaluza and completely monotone sequence tests.
//! * [`decompose`]: renewal, compound geometric and canonical coefficient recursions.
//! * [`walkfactor`]: two-sided lattice laws driven by log-convex tails, their
//!   Wiener-Hopf factorization and the resulting certificate.
//! * [`contdens`]: discretization of continuous constructions onto lattices.
//! * [`counterexamples`]: executable non-divisibility witnesses.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contdens;
pub mod counterexamples;
pub mod decompose;
pub mod error;
pub mod seq;
pub mod seqcheck;
pub mod series;
pub mod walkfactor;

pub use decompose::{
    certify_id_nonneg, compound_geometric, levy_coeffs, renewal_increments, CompoundGeometricRep,
    IdCertificate, LatticePmf, LevyRep, Verdict,
};
pub use error::{Error, Result};
pub use seq::{GeomTail, NonnegSeq};
pub use seqcheck::{CheckReport, RatioProfile};
pub use series::{series_exp, series_log, PowerSeries};
