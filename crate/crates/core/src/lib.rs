//! Sparse phase retrieval by Newton-type hard thresholding.
//!
//! Recovers an `s`-sparse `x ∈ ℝⁿ` (up to global sign) from phaseless
//! measurements `y_i = (a_i·x)²`, possibly corrupted by additive noise.
//! The pipeline is [`spectral::spectral_init`] followed by
//! [`solver::solve`]; [`solver::iht_solve`] is the first-order baseline.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.

pub mod error;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod objectives;
pub mod scalar;
pub mod seed;
pub mod solver;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use measurement::{
    generate_gaussian_matrix, generate_instance, generate_sparse_signal, measure, GroundTruth,
    ProblemInstance, SensingMatrix,
};
pub use scalar::Scalar;
pub use seed::TrialSeeds;
pub use solver::{iht_solve, solve, SolverConfig, SparseIterate, Termination, TrialOutcome};
pub use sparse::{hard_threshold, signed_distance, support_of, SupportSet};
pub use spectral::{spectral_init, InitReport};

pub type Instance = ProblemInstance<f64>;
pub type Instance32 = ProblemInstance<f32>;
pub type Matrix = SensingMatrix<f64>;
pub type Matrix32 = SensingMatrix<f32>;
pub type Truth = GroundTruth<f64>;
pub type Truth32 = GroundTruth<f32>;
pub type Config = SolverConfig<f64>;
pub type Config32 = SolverConfig<f32>;
pub type Outcome = TrialOutcome<f64>;
pub type Outcome32 = TrialOutcome<f32>;
