//! Two-sided lattice laws driven by log-convex tail sequences.
//!
//! A driver `v` defines the law `K p_x = sum_{j > |x|} v_{±j}`; after balancing
//! and a geometric truncation of the positive tail, the increment law `w` of
//! first differences has mean zero and its random walk factorizes into weak
//! descending and strict ascending ladder heights. The tail sequences of those
//! heights are log-convex, hence proportional to compound geometric laws, which
//! certifies infinite divisibility of `p`.

mod certify;
mod ladder;
mod law;
mod vspec;
mod wh;

pub use certify::{
    certify_id_two_sided, default_grid, mgf_domain, normalized_lattice, verify_factorization,
    CertifyConfig, FactorizationCheck, Route, Stage, TwoSidedCertificate,
};
pub use ladder::{
    factor_tails, ladder_heights_dp, structural_identity_residual, FactorTails, LadderFactor,
    LadderMethod,
};
pub use law::{
    cm_two_sided, cm_two_sided_p0, mixture_with_atom, mixture_with_atom_lattice, tv_distance,
    TwoSidedPmf,
};
pub use vspec::{
    build_p_from_v, build_w, check_telescoping, gen_vspec, geometric_tail, normalize_v,
    tail_log_convexity, vspec_from_pmf_differences, VSpec,
};
pub use wh::wiener_hopf_factor;
