//! Stochastic-chaining generalization bounds.
//!
//! A stochastic chain replaces the hierarchical partitions of classical
//! chaining with a Markov sequence of increasingly fine randomized
//! approximations of the learned parameter. This crate evaluates the
//! resulting chained series bounds (mutual-information, KL-conditional, and
//! cumulant-generating-function forms, plus the deterministic-partition
//! special case), instantiates them on two worked examples, and validates
//! every closed form against independent Monte Carlo estimators:
//!
//! - [`chain`]: chain data types, series evaluators with certified
//!   geometric tail truncation, and the partition-chain adapter.
//! - [`cgf`]: Legendre-dual machinery for non-sub-Gaussian tails.
//! - [`gaussian`]: Gaussian mean estimation (bound `O(sigma²/n)` against the
//!   exact generalization error `2 sigma²/n`).
//! - [`phase`]: phase retrieval on the circle (optimizable decay ratio,
//!   deterministic-chaining baseline, exact value).
//! - [`estimators`]: seeded, thread-count-independent Monte Carlo layer.
//! - [`vc`]: finite-class chaining under the empirical Rademacher metric
//!   with greedy nets, recovering the `sqrt(d_vc / n)` scaling.

#![forbid(unsafe_code)]

pub mod cgf;
pub mod chain;
mod error;
pub mod estimators;
pub mod gaussian;
mod opt;
pub mod phase;
pub mod render;
pub mod vc;

pub use cgf::{evaluate_cgf_bound, legendre_dual, legendre_dual_inverse, CgfSpec};
pub use chain::{
    evaluate_kl_bound, evaluate_mi_bound, partition_chain, BoundReport, BoundVariant, ChainLevel,
    ChainSpec, ChainStart, TailMajorant, TruncationPolicy,
};
pub use error::{Error, Result};
pub use estimators::{
    dv_direction_check, histogram_mi, histogram_mi_ranged, ks_two_sample, mc_generalization,
    mgf_subgaussian_check, McEstimate, ProcessSampler,
};
pub use gaussian::GaussianParams;
pub use phase::PhaseParams;
