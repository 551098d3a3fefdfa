use super::{check_shape, sym_eigvals, LinalgError, Mat, Result, SpdOperator};

/// `trace(Vᵀ W)`.
pub fn frobenius_inner(v: &Mat, w: &Mat) -> f64 {
    v.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

fn check_pair(a: &SpdOperator, v: &Mat, w: &Mat) -> Result<()> {
    check_shape(v, a.dim(), v.ncols())?;
    check_shape(w, a.dim(), v.ncols())
}

/// `trace(Vᵀ A⁻¹ W)`, evaluated as the Frobenius inner product of `L⁻¹V` and `L⁻¹W`.
pub fn ainvf_inner(a: &SpdOperator, v: &Mat, w: &Mat) -> Result<f64> {
    check_pair(a, v, w)?;
    Ok(frobenius_inner(&a.whiten(v), &a.whiten(w)))
}

/// `sqrt(trace(Vᵀ A⁻¹ V))`.
pub fn ainvf_norm(a: &SpdOperator, v: &Mat) -> Result<f64> {
    check_shape(v, a.dim(), v.ncols())?;
    Ok(a.whiten(v).norm())
}

/// Operator norm of `M` on `ℝⁿ` with the `A⁻¹` inner product, i.e. `σ_max(L⁻¹ M L)`.
pub fn op_norm_ainv(a: &SpdOperator, m: &Mat) -> Result<f64> {
    let n = a.dim();
    check_shape(m, n, n)?;
    let k = a.whiten(&(m * a.chol()));
    let gram = k.transpose() * &k;
    let top = sym_eigvals(&gram)?
        .last()
        .copied()
        .ok_or(LinalgError::EmptyBlock)?;
    Ok(top.max(0.0).sqrt())
}
