//! Exact distributional calculus for vector-valued Rademacher sums.
//!
//! A Rademacher sum is `X = sum_n eps_n x_n` with independent fair signs
//! `eps_n` and coefficients `x_n` in a finite-dimensional normed space.
//! This crate computes, at desk scale and with certified exactness flags:
//!
//! * the scalar interpolation functional `K_{1,2}((a_n), t)` with its
//!   realizing splits ([`kfunc`]);
//! * weak-lp norms and the dual-ball supremum `Kw_{1,2}((x_n), t)`
//!   ([`weak`]);
//! * the exact law of `S = ||X||` by Gray-code enumeration, or a
//!   deterministic Monte Carlo surrogate, together with its tails,
//!   rearrangements, moments, weak-Lp and Orlicz norms ([`dist`]);
//! * margin reports for the classical concentration and equivalence
//!   inequalities that tie those quantities together ([`verify`]),
//!   orchestrated through scenario files ([`scenario`]).
//!
//! The accompanying guide in `book/` walks through the mathematics; its
//! code snippets compile and run as doctests of this crate.

pub mod dist;
pub mod error;
pub mod kfunc;
pub mod oracle;
pub mod rng;
pub mod scenario;
pub mod signs;
pub mod space;
pub mod verify;
pub mod weak;

pub use dist::{enumerate_exact, sample_mc, DistKind, DistSummary, RademacherModel, SampleMode};
pub use error::{Error, ErrorKind, Result};
pub use kfunc::{k12_exact, k12_holmstedt, k12_scaling_bound, KValue, ScalarSeq};
pub use space::{
    apply_dual, dual_extreme_points, CoefficientFamily, DualExtremePoints, DualFunctional,
    SpaceFamily, SpaceSpec,
};
pub use verify::{run_checks, CheckId, CheckRecord, VerificationReport};
pub use weak::{
    coordinate_split, kw12, kw12_exact, kw_profile, weak_lp_norm, weak_lp_norm_exact,
    AscentConfig, Evaluated, Exactness, KProfile, SplitCertificate,
};

/// Book chapters compiled as doctests (`cargo test --doc`), keeping the
/// guide's code in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/k-functional.md")]
    mod k_functional {}
    #[doc = include_str!("../../../book/src/weak-norms.md")]
    mod weak_norms {}
    #[doc = include_str!("../../../book/src/distribution.md")]
    mod distribution {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
