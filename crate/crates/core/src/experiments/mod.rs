//! Test matrices, the scenario registry and the runner that ties solver and bounds together.

mod matrices;
mod onset;
mod scenario;

pub use matrices::{
    clustered_spectrum, clustered_spectrum_values, four_small_spectrum, ic0, isolated_spectrum, linspace,
    multiplicity_spectrum, multiplicity_spectrum_values, poisson2d, preconditioned_operator, spectrum_matrix,
};
pub use onset::{local_ratios, superlinearity_onset};
pub use scenario::{
    build_problem, initial_guess, log_correlation, run_scenario, ConfigOutcome, MatrixRecipe, Problem, RunArtifact,
    Scenario, DEFAULT_SEED, DEFAULT_TOL, ONSET_WINDOW, SCENARIO_IDS,
};

use crate::bounds::BoundsError;
use crate::krylov::KrylovError;
use crate::linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("eigenvalue {value} is not positive")]
    NonPositive { value: f64 },
    #[error("incomplete Cholesky pivot {index} is not positive")]
    PivotLoss { index: usize },
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
