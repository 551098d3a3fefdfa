use super::{LinalgError, Mat, Result};

/// Relative threshold on `|R_kk|` below which [`qr_tall`] reports rank deficiency.
pub const QR_RANK_TOL: f64 = 1e-13;

/// Relative threshold (against the leading pivot) used to decide the numerical rank
/// in [`least_squares`].
const LS_RANK_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
///
/// Only the lower triangle of `a` is read.
pub fn cholesky_factor(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: (n, n),
            got: a.shape(),
        });
    }
    let mut l = Mat::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in j..n {
            col[i] = a[(i, j)];
        }
        for k in 0..j {
            let ljk = l[(j, k)];
            if ljk == 0.0 {
                continue;
            }
            let lk = l.column(k);
            for i in j..n {
                col[i] -= lk[i] * ljk;
            }
        }
        let pivot = col[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            l[(i, j)] = col[i] / d;
        }
    }
    Ok(l)
}

/// Solves `L X = B` by forward substitution.
pub fn solve_lower(l: &Mat, b: &Mat) -> Mat {
    let n = l.nrows();
    debug_assert_eq!(b.nrows(), n);
    let mut x = b.clone();
    for c in 0..x.ncols() {
        let mut xc = x.column_mut(c);
        for j in 0..n {
            let v = xc[j] / l[(j, j)];
            xc[j] = v;
            if v != 0.0 {
                let lj = l.column(j);
                for i in j + 1..n {
                    xc[i] -= lj[i] * v;
                }
            }
        }
    }
    x
}

/// Solves `Lᵀ X = B` by back substitution.
pub fn solve_lower_transpose(l: &Mat, b: &Mat) -> Mat {
    let n = l.nrows();
    debug_assert_eq!(b.nrows(), n);
    let mut x = b.clone();
    for c in 0..x.ncols() {
        let mut xc = x.column_mut(c);
        for j in (0..n).rev() {
            let lj = l.column(j);
            let mut acc = xc[j];
            for i in j + 1..n {
                acc -= lj[i] * xc[i];
            }
            xc[j] = acc / l[(j, j)];
        }
    }
    x
}

/// Solves `R x = b` for the leading `r×r` upper-triangular block of `r_mat`, in place on `b`.
fn solve_upper_leading(r_mat: &Mat, b: &mut Mat, r: usize) {
    for c in 0..b.ncols() {
        for j in (0..r).rev() {
            let mut acc = b[(j, c)];
            for k in j + 1..r {
                acc -= r_mat[(j, k)] * b[(k, c)];
            }
            b[(j, c)] = acc / r_mat[(j, j)];
        }
    }
}

/// Householder reflector annihilating `x[1..]`; returns `(v, beta, alpha)` with
/// `(I - beta v vᵀ) x = alpha e_1`.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v = x.to_vec();
    if norm == 0.0 {
        return (v, 0.0, 0.0);
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let vtv: f64 = v.iter().map(|t| t * t).sum();
    let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
    (v, beta, alpha)
}

/// Applies `I - beta v vᵀ` to rows `k..` of columns `cols` of `a`.
fn apply_reflector(a: &mut Mat, k: usize, v: &[f64], beta: f64, cols: std::ops::Range<usize>) {
    if beta == 0.0 {
        return;
    }
    for c in cols {
        let mut col = a.column_mut(c);
        let mut t = 0.0;
        for (i, vi) in v.iter().enumerate() {
            t += vi * col[k + i];
        }
        t *= beta;
        if t != 0.0 {
            for (i, vi) in v.iter().enumerate() {
                col[k + i] -= t * vi;
            }
        }
    }
}

/// Thin QR of a tall block, `M = Q R`, with `diag(R) >= 0`.
///
/// Fails with [`LinalgError::RankDeficient`] when a diagonal entry of `R` falls below
/// `QR_RANK_TOL · ‖M‖_F`.
pub fn qr_tall(m: &Mat) -> Result<(Mat, Mat)> {
    qr_tall_with_reference(m, m.norm())
}

/// Same as [`qr_tall`] but the rank threshold is `QR_RANK_TOL · reference`.
///
/// Block Lanczos passes the norm of `A·U_i` here so that a remainder that is small
/// relative to the operator is recognized as a breakdown even when it is well
/// conditioned on its own scale.
pub fn qr_tall_with_reference(m: &Mat, reference: f64) -> Result<(Mat, Mat)> {
    let (n, s) = m.shape();
    if n < s {
        return Err(LinalgError::DimensionMismatch {
            expected: (s, s),
            got: (n, s),
        });
    }
    if s == 0 {
        return Err(LinalgError::EmptyBlock);
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let mut a = m.clone();
    let mut reflectors = Vec::with_capacity(s);
    for k in 0..s {
        let x: Vec<f64> = a.column(k).rows(k, n - k).iter().copied().collect();
        let (v, beta, alpha) = householder(&x);
        apply_reflector(&mut a, k, &v, beta, k..s);
        if beta != 0.0 {
            a[(k, k)] = alpha;
            for i in k + 1..n {
                a[(i, k)] = 0.0;
            }
        }
        reflectors.push((v, beta));
    }
    let mut r = a.rows(0, s).upper_triangle();
    let mut q = Mat::identity(n, s);
    for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
        apply_reflector(&mut q, k, v, *beta, 0..s);
    }
    for k in 0..s {
        if r[(k, k)] < 0.0 {
            for c in k..s {
                r[(k, c)] = -r[(k, c)];
            }
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    let threshold = QR_RANK_TOL * reference;
    for k in 0..s {
        let mag = r[(k, k)].abs();
        if reference == 0.0 || mag <= threshold {
            return Err(LinalgError::RankDeficient {
                column: k,
                magnitude: mag,
            });
        }
    }
    Ok((q, r))
}

/// Solution of a (possibly rank-deficient) least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// `q×s` coefficients; entries for pivoted-out columns are zero.
    pub coeffs: Mat,
    /// Numerical rank of the coefficient matrix.
    pub rank: usize,
    /// Frobenius norm of the residual `M·C − B`.
    pub residual_norm: f64,
}

impl LeastSquares {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.coeffs.nrows()
    }
}

/// Minimizes `‖M C − B‖_F` column by column using Householder QR with column pivoting.
///
/// In the rank-deficient case the basic solution is returned.
pub fn least_squares(m: &Mat, b: &Mat) -> Result<LeastSquares> {
    let (p, q) = m.shape();
    if b.nrows() != p {
        return Err(LinalgError::DimensionMismatch {
            expected: (p, b.ncols()),
            got: b.shape(),
        });
    }
    if p < q {
        return Err(LinalgError::DimensionMismatch {
            expected: (q, q),
            got: (p, q),
        });
    }
    let s = b.ncols();
    let mut a = m.clone();
    let mut rhs = b.clone();
    let mut perm: Vec<usize> = (0..q).collect();
    for k in 0..q {
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..q {
            let nrm = a.column(j).rows(k, p - k).norm_squared();
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        if best != k {
            a.swap_columns(k, best);
            perm.swap(k, best);
        }
        let x: Vec<f64> = a.column(k).rows(k, p - k).iter().copied().collect();
        let (v, beta, alpha) = householder(&x);
        apply_reflector(&mut a, k, &v, beta, k..q);
        apply_reflector(&mut rhs, k, &v, beta, 0..s);
        if beta != 0.0 {
            a[(k, k)] = alpha;
            for i in k + 1..p {
                a[(i, k)] = 0.0;
            }
        }
    }
    let lead = if q > 0 { a[(0, 0)].abs() } else { 0.0 };
    let rank = (0..q)
        .take_while(|&k| lead > 0.0 && a[(k, k)].abs() > LS_RANK_TOL * lead)
        .count();
    let residual_norm = rhs.rows(rank, p - rank).norm();
    let mut z = rhs.rows(0, rank).into_owned();
    solve_upper_leading(&a, &mut z, rank);
    let mut coeffs = Mat::zeros(q, s);
    for (i, &col) in perm.iter().enumerate().take(rank) {
        coeffs.row_mut(col).copy_from(&z.row(i));
    }
    Ok(LeastSquares {
        coeffs,
        rank,
        residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let l = cholesky_factor(&Mat::identity(3, 3)).unwrap();
        assert_eq!(l, Mat::identity(3, 3));
        let l = cholesky_factor(&Mat::from_diagonal(&nalgebra::dvector![4.0, 9.0])).unwrap();
        assert_eq!(l, Mat::from_diagonal(&nalgebra::dvector![2.0, 3.0]));
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let g = random(5, 5, 11);
        let m = g.transpose() * &g + Mat::identity(5, 5);
        let l = cholesky_factor(&m).unwrap();
        assert!(l.upper_triangle().lower_triangle() == Mat::from_diagonal(&l.diagonal()));
        assert!((&l * l.transpose() - &m).norm() <= 1e-12 * m.norm());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            cholesky_factor(&m),
            Err(LinalgError::NotPositiveDefinite { pivot: 1 })
        );
        let z = Mat::zeros(2, 2);
        assert_eq!(
            cholesky_factor(&z),
            Err(LinalgError::NotPositiveDefinite { pivot: 0 })
        );
    }

    #[test]
    fn triangular_solves_invert_factor() {
        let g = random(6, 6, 3);
        let m = g.transpose() * &g + Mat::identity(6, 6);
        let l = cholesky_factor(&m).unwrap();
        let b = random(6, 2, 4);
        let y = solve_lower(&l, &b);
        assert!((&l * &y - &b).norm() < 1e-12);
        let x = solve_lower_transpose(&l, &b);
        assert!((l.transpose() * &x - &b).norm() < 1e-12);
    }

    #[test]
    fn qr_of_orthonormal_block_is_trivial() {
        let m = Mat::identity(4, 2);
        let (q, r) = qr_tall(&m).unwrap();
        assert!((q - &m).norm() < 1e-15);
        assert!((r - Mat::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn qr_three_four_five() {
        let m = Mat::from_column_slice(2, 1, &[3.0, 4.0]);
        let (q, r) = qr_tall(&m).unwrap();
        assert!((q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((q[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((r[(0, 0)] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn qr_random_reconstruction() {
        let m = random(8, 3, 5);
        let (q, r) = qr_tall(&m).unwrap();
        assert!((q.transpose() * &q - Mat::identity(3, 3)).norm() <= 1e-12);
        assert!((&q * &r - &m).norm() <= 1e-12 * m.norm());
        assert!(r.diagonal().iter().all(|&d| d >= 0.0));
        assert_eq!(r, r.upper_triangle());
    }

    #[test]
    fn qr_flags_dependent_columns() {
        let mut m = random(6, 3, 9);
        let c0 = m.column(0).into_owned();
        m.set_column(2, &(c0 * 2.0));
        match qr_tall(&m) {
            Err(LinalgError::RankDeficient { column, .. }) => assert_eq!(column, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        assert!(matches!(
            qr_tall(&Mat::zeros(3, 1)),
            Err(LinalgError::RankDeficient { column: 0, .. })
        ));
    }

    #[test]
    fn least_squares_identity_and_mean() {
        let b = random(3, 2, 1);
        let ls = least_squares(&Mat::identity(3, 3), &b).unwrap();
        assert!((ls.coeffs - &b).norm() < 1e-14);
        let m = Mat::from_column_slice(2, 1, &[1.0, 1.0]);
        let rhs = Mat::from_column_slice(2, 1, &[1.0, 3.0]);
        let ls = least_squares(&m, &rhs).unwrap();
        assert!((ls.coeffs[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((ls.residual_norm - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn least_squares_satisfies_normal_equations() {
        let m = random(10, 4, 21);
        let b = random(10, 2, 22);
        let ls = least_squares(&m, &b).unwrap();
        assert_eq!(ls.rank, 4);
        let grad = m.transpose() * (&m * &ls.coeffs - &b);
        assert!(grad.norm() < 1e-10);
        assert!(((&m * &ls.coeffs - &b).norm() - ls.residual_norm).abs() < 1e-12);
    }

    #[test]
    fn least_squares_rank_deficient_basic_solution() {
        let mut m = random(7, 3, 30);
        let c0 = m.column(0).into_owned();
        m.set_column(1, &(-c0));
        let b = random(7, 1, 31);
        let ls = least_squares(&m, &b).unwrap();
        assert_eq!(ls.rank, 2);
        assert_eq!(ls.coeffs.iter().filter(|v| **v == 0.0).count(), 1);
        let grad = m.transpose() * (&m * &ls.coeffs - &b);
        assert!(grad.norm() < 1e-10);
    }
}
