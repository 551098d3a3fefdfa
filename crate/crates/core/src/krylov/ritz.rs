use crate::linalg::Mat;

/// Eigenpairs of `T_m` with the eigenvectors lifted through the Lanczos basis.
#[derive(Debug, Clone)]
pub struct RitzSet {
    pub step: usize,
    /// Ascending Ritz values `θ_1 ≤ … ≤ θ_{ms}`.
    pub values: Vec<f64>,
    /// `n × ms`; column `i` is the Ritz vector for `values[i]`.
    pub vectors: Mat,
}

impl RitzSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// The `k1` lowest followed by the `k2` highest Ritz vectors, or `None` when the set
    /// is too small to supply them without overlap.
    pub fn extreme_vectors(&self, k1: usize, k2: usize) -> Option<Mat> {
        let len = self.len();
        if k1 + k2 > len {
            return None;
        }
        let n = self.vectors.nrows();
        let mut z = Mat::zeros(n, k1 + k2);
        z.columns_mut(0, k1).copy_from(&self.vectors.columns(0, k1));
        z.columns_mut(k1, k2).copy_from(&self.vectors.columns(len - k2, k2));
        Some(z)
    }
}
