//! Block Lanczos, the block CG solver built on it, and Ritz extraction.

mod lanczos;
mod ritz;
mod solver;

pub use lanczos::{krylov_basis, lanczos_init, BlockTridiagonal, Breakdown, KrylovBasis, LanczosState};
pub use ritz::RitzSet;
pub use solver::{
    block_cg_solve, block_cg_solve_with, comparison_process, SolveOptions, SolveTrace, StepRecord, StopReason,
};

use crate::linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrylovError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("block Lanczos breakdown at step {step} (column {column}, |r_kk| = {magnitude:.3e})")]
    Breakdown {
        step: usize,
        column: usize,
        magnitude: f64,
    },
    #[error("projected matrix T_{m} is not positive definite")]
    TmNotPositiveDefinite { m: usize },
    #[error("no convergence within {max_m} block steps")]
    NoConvergence { max_m: usize },
    #[error("step {m} is not available (only {available} steps recorded)")]
    StepUnavailable { m: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, KrylovError>;
