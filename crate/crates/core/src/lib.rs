//! Finite-horizon experiments with ideal convergence of real sequences.
//!
//! Sets of naturals are truncated to `[1, N]` ([`TruncatedSet`]); ideals are
//! chosen from a registry of families ([`IdealSpec`]) and judged through
//! densities, block tail norms or summable tails. On top of that sit
//! estimates of `I`-limit and `I`-cluster points of a sequence, the diagonal
//! construction that glues index sets along converging limit points, and
//! Monte Carlo experiments over random subsequences.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod descriptor;
pub mod diagonal;
pub mod error;
pub mod experiment;
pub mod ideal;
pub mod limits;
pub mod omega;
pub mod report;
pub mod sequence;
pub mod set;
pub mod sieve;
pub mod submeasure;
pub mod weight;

pub use density::{
    upper_alpha_density, upper_weighted_density, DensityEstimate, Schedule, Verdict,
};
pub use descriptor::SetDescriptor;
pub use diagonal::{diagonal_construct, DiagonalConstruction, DiagonalParams, MassCriterion};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentRegistry, ExperimentResult};
pub use ideal::{IdealFamily, IdealRegistry, IdealSpec};
pub use limits::{
    cluster_points_estimate, limit_points_estimate, neighborhood_index_set, EpsSchedule, GridSpec,
    LimitPointReport,
};
pub use omega::{relative_density, restrict, sample_omega, OmegaSample};
pub use report::Report;
pub use sequence::{make_sequence, SequenceKind, SequenceSource};
pub use set::{compose, dominates, scale, TruncatedSet};
pub use sieve::{lpf_sieve, lpf_sieve_cached, LpfTable};
pub use submeasure::{norm_estimate, BlockSequence, NormEstimate};
pub use weight::WeightFunction;
