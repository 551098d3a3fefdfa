use super::{ExperimentError, Result};
use crate::linalg::{solve_lower, Mat, SpdOperator};

/// `count` equally spaced values from `start` to `end`, both included.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Diagonal operator with the given (positive) eigenvalues.
pub fn spectrum_matrix(values: &[f64]) -> Result<SpdOperator> {
    if let Some(&v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(ExperimentError::NonPositive { value: v });
    }
    Ok(SpdOperator::from_diagonal(values)?)
}

/// `0.1, 0.2, 0.3, 0.4` followed by 96 values from 5 to 100.
pub fn four_small_spectrum() -> Vec<f64> {
    let mut v = vec![0.1, 0.2, 0.3, 0.4];
    v.extend(linspace(5.0, 100.0, 96));
    v
}

/// One eigenvalue at `0.0005` and 403 values on `[0.08, 2.42]`.
pub fn isolated_spectrum() -> Vec<f64> {
    let mut v = vec![0.0005];
    v.extend(linspace(0.08, 2.42, 403));
    v
}

/// Six small eigenvalues `0.0005..0.0055` and 398 values on `[0.08, 2.42]`.
pub fn clustered_spectrum_values() -> Vec<f64> {
    let mut v = vec![0.0005, 0.0015, 0.0025, 0.0035, 0.0045, 0.0055];
    v.extend(linspace(0.08, 2.42, 398));
    v
}

pub fn clustered_spectrum() -> Result<SpdOperator> {
    spectrum_matrix(&clustered_spectrum_values())
}

/// `0.0005` with multiplicity five and 379 values on `[0.065, 5.42]`.
pub fn multiplicity_spectrum_values() -> Vec<f64> {
    let mut v = vec![0.0005; 5];
    v.extend(linspace(0.065, 5.42, 379));
    v
}

pub fn multiplicity_spectrum() -> Result<SpdOperator> {
    spectrum_matrix(&multiplicity_spectrum_values())
}

/// Five-point Laplacian on a `g×g` interior grid, rows ordered row by row.
pub fn poisson2d(g: usize) -> Mat {
    let n = g * g;
    let mut a = Mat::zeros(n, n);
    for r in 0..g {
        for c in 0..g {
            let i = r * g + c;
            a[(i, i)] = 4.0;
            if c + 1 < g {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
            if r + 1 < g {
                a[(i, i + g)] = -1.0;
                a[(i + g, i)] = -1.0;
            }
        }
    }
    a
}

/// Incomplete Cholesky factor restricted to the nonzero pattern of the lower triangle of `a`.
pub fn ic0(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let pattern = |i: usize, j: usize| a[(i, j)] != 0.0;
    let mut l = a.lower_triangle();
    for k in 0..n {
        let pivot = l[(k, k)];
        if !(pivot > 0.0) {
            return Err(ExperimentError::PivotLoss { index: k });
        }
        let d = pivot.sqrt();
        l[(k, k)] = d;
        for i in k + 1..n {
            if pattern(i, k) {
                l[(i, k)] /= d;
            }
        }
        for j in k + 1..n {
            let ljk = l[(j, k)];
            if ljk == 0.0 {
                continue;
            }
            for i in j..n {
                if pattern(i, j) {
                    let lik = l[(i, k)];
                    l[(i, j)] -= lik * ljk;
                }
            }
        }
    }
    Ok(l)
}

/// `Ã = L⁻¹ A L⁻ᵀ`, formed densely.
pub fn preconditioned_operator(a: &Mat, l: &Mat) -> Result<SpdOperator> {
    let left = solve_lower(l, a);
    let full = solve_lower(l, &left.transpose());
    Ok(SpdOperator::new(full)?)
}
