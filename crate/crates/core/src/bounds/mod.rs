//! A-posteriori bounds on `‖R_{m+j}‖_{A⁻¹-F}` built from the state of block CG at step `m`.
//!
//! The subspace bound `b1` measures how far the Ritz subspace `Y = A Z` is from a target
//! invariant subspace through the gap `γ_m`. The spectral bound `b2 = α ‖R̄_j‖` compares
//! against block CG restarted from the residual with the target components removed.

mod series;
mod spectral;
mod subspace;

pub use series::{compute_bound_series, trace_identity_check, BoundConfig, BoundSeries};
pub use spectral::{alpha_factor, AlphaFactor, ALPHA_UNRELIABLE_TOL};
pub use subspace::{
    gamma, gamma_crosscheck, ritz_subspace_y, subspace_bound_series, DeflationTarget, SpectralProjector,
    SubspaceBound,
};

use crate::krylov::KrylovError;
use crate::linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("the {which} basis lost rank after mapping through the Cholesky factor")]
    RankCollapse { which: &'static str },
    #[error("need {needed} Ritz values but only {available} are available")]
    InsufficientRitz { needed: usize, available: usize },
    #[error("zero denominator in the spectral factor (Ritz index {ritz}, eigenvalue index {eig})")]
    DegenerateDenominator { ritz: usize, eig: usize },
    #[error("invalid deflation target: k1 = {k1}, k2 = {k2}, n = {n}")]
    InvalidTarget { k1: usize, k2: usize, n: usize },
    #[error("bound horizon needs step {needed} but the solve stopped at {available}")]
    HorizonBeyondTrace { needed: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, BoundsError>;
