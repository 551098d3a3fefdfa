//! Dense real linear-algebra kernels.
//!
//! Everything here works on column-major [`nalgebra::DMatrix<f64>`] storage. The
//! factorizations are written out by hand so that sign conventions, rank thresholds
//! and failure modes are fixed and reproducible across platforms.

mod eigen;
mod factor;
mod norms;
mod spd;

pub use eigen::{sym_eig, sym_eigvals, SpectralDecomposition};
pub use factor::{
    cholesky_factor, least_squares, qr_tall, qr_tall_with_reference, solve_lower, solve_lower_transpose,
    LeastSquares, QR_RANK_TOL,
};
pub use norms::{ainvf_inner, ainvf_norm, frobenius_inner, op_norm_ainv};
pub use spd::{BlockVector, SpdOperator, ASYMMETRY_TOL};

use thiserror::Error;

pub type Mat = nalgebra::DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} <= 0)")]
    NotPositiveDefinite { pivot: usize },
    #[error("rank deficient at column {column} (|r_kk| = {magnitude:.3e})")]
    RankDeficient { column: usize, magnitude: f64 },
    #[error("symmetric eigensolver did not converge at row {row}")]
    NoConvergence { row: usize },
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("block vector must have at least one column")]
    EmptyBlock,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

pub(crate) fn check_shape(m: &Mat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(LinalgError::DimensionMismatch {
            expected: (rows, cols),
            got: m.shape(),
        });
    }
    Ok(())
}
