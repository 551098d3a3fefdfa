use std::sync::OnceLock;

use super::{cholesky_factor, solve_lower, solve_lower_transpose, sym_eigvals, LinalgError, Mat, Result};

/// Relative Frobenius asymmetry above which [`SpdOperator::was_asymmetric`] reports true.
pub const ASYMMETRY_TOL: f64 = 1e-12;

/// An `n×s` column block. Residuals, bases and right-hand sides all use this shape.
pub type BlockVector = Mat;

/// Dense symmetric positive definite matrix with its Cholesky factor.
#[derive(Debug)]
pub struct SpdOperator {
    matrix: Mat,
    chol: Mat,
    asymmetric: bool,
    spectral_norm: OnceLock<f64>,
}

impl Clone for SpdOperator {
    fn clone(&self) -> Self {
        let spectral_norm = OnceLock::new();
        if let Some(v) = self.spectral_norm.get() {
            let _ = spectral_norm.set(*v);
        }
        Self {
            matrix: self.matrix.clone(),
            chol: self.chol.clone(),
            asymmetric: self.asymmetric,
            spectral_norm,
        }
    }
}

impl SpdOperator {
    /// Symmetrizes `m` as `(m + mᵀ)/2` and factors it.
    pub fn new(m: Mat) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, n),
                got: m.shape(),
            });
        }
        if n == 0 {
            return Err(LinalgError::EmptyBlock);
        }
        if !m.iter().all(|v| v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let skew = (&m - m.transpose()).norm();
        let asymmetric = skew > ASYMMETRY_TOL * m.norm();
        let matrix = (&m + m.transpose()) * 0.5;
        let chol = cholesky_factor(&matrix)?;
        Ok(Self {
            matrix,
            chol,
            asymmetric,
            spectral_norm: OnceLock::new(),
        })
    }

    /// Diagonal operator with the given entries.
    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Lower-triangular `L` with `A = L Lᵀ`.
    pub fn chol(&self) -> &Mat {
        &self.chol
    }

    /// Whether the input to [`SpdOperator::new`] was noticeably asymmetric.
    pub fn was_asymmetric(&self) -> bool {
        self.asymmetric
    }

    /// `A·V`.
    pub fn apply(&self, v: &Mat) -> Mat {
        &self.matrix * v
    }

    /// `L⁻¹·V`.
    pub fn whiten(&self, v: &Mat) -> Mat {
        solve_lower(&self.chol, v)
    }

    /// `A⁻¹·V` via two triangular solves.
    pub fn solve(&self, v: &Mat) -> Mat {
        solve_lower_transpose(&self.chol, &solve_lower(&self.chol, v))
    }

    /// `‖A‖₂`, the largest eigenvalue. Computed on first use.
    pub fn spectral_norm(&self) -> f64 {
        *self.spectral_norm.get_or_init(|| {
            sym_eigvals(&self.matrix)
                .ok()
                .and_then(|v| v.last().copied())
                .unwrap_or_else(|| self.matrix.norm())
        })
    }

    /// Checks that `v` is a usable `n×s` block.
    pub fn check_block(&self, v: &Mat) -> Result<()> {
        if v.nrows() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.dim(), v.ncols()),
                got: v.shape(),
            });
        }
        if v.ncols() == 0 {
            return Err(LinalgError::EmptyBlock);
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(())
    }
}
