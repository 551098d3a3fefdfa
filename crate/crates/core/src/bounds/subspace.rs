use super::{BoundsError, Result};
use crate::krylov::{krylov_basis, RitzSet};
use crate::linalg::{least_squares, op_norm_ainv, qr_tall, sym_eigvals, Mat, SpectralDecomposition, SpdOperator};

/// Eigenvectors of `A` for the `k1` smallest and `k2` largest eigenvalues.
#[derive(Debug, Clone)]
pub struct DeflationTarget {
    pub k1: usize,
    pub k2: usize,
    /// `n × (k1 + k2)` Euclidean-orthonormal eigenvectors.
    pub q: Mat,
    /// Full ascending spectrum.
    pub lambdas: Vec<f64>,
}

impl DeflationTarget {
    pub fn new(decomposition: &SpectralDecomposition, k1: usize, k2: usize) -> Result<Self> {
        let n = decomposition.dim();
        if k1 + k2 == 0 || k1 + k2 >= n {
            return Err(BoundsError::InvalidTarget { k1, k2, n });
        }
        let v = &decomposition.eigenvectors;
        let mut q = Mat::zeros(n, k1 + k2);
        q.columns_mut(0, k1).copy_from(&v.columns(0, k1));
        q.columns_mut(k1, k2).copy_from(&v.columns(n - k2, k2));
        Ok(Self {
            k1,
            k2,
            q,
            lambdas: decomposition.eigenvalues.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.k1 + self.k2
    }

    pub fn projector(&self) -> SpectralProjector<'_> {
        SpectralProjector { q: &self.q }
    }
}

/// Orthogonal projector `Π_Q = Q Qᵀ` applied without forming an `n×n` matrix.
#[derive(Debug, Clone, Copy)]
pub struct SpectralProjector<'a> {
    pub q: &'a Mat,
}

impl SpectralProjector<'_> {
    /// `Π_Q V`.
    pub fn apply(&self, v: &Mat) -> Mat {
        self.q * (self.q.transpose() * v)
    }

    /// `(I − Π_Q) V`.
    pub fn complement(&self, v: &Mat) -> Mat {
        v - self.apply(v)
    }
}

/// `Y = A Z` with `Z` the Ritz vectors for the `k1` lowest and `k2` highest Ritz values.
pub fn ritz_subspace_y(a: &SpdOperator, ritz: &RitzSet, k1: usize, k2: usize) -> Result<Mat> {
    let z = ritz.extreme_vectors(k1, k2).ok_or(BoundsError::InsufficientRitz {
        needed: k1 + k2,
        available: ritz.len(),
    })?;
    Ok(a.apply(&z))
}

fn whitened_orthonormal(a: &SpdOperator, m: &Mat, which: &'static str) -> Result<Mat> {
    qr_tall(&a.whiten(m))
        .map(|(q, _)| q)
        .map_err(|_| BoundsError::RankCollapse { which })
}

fn largest_singular_value(m: &Mat) -> Result<f64> {
    let gram = m.transpose() * m;
    let top = sym_eigvals(&gram)?.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Sine of the largest canonical angle between `range(Y)` and `range(Q)` in the `A⁻¹`
/// geometry, before clamping.
pub(crate) fn gamma_raw(a: &SpdOperator, y: &Mat, q: &Mat) -> Result<f64> {
    let yh = whitened_orthonormal(a, y, "Y")?;
    let qh = whitened_orthonormal(a, q, "Q")?;
    let residual = &qh - &yh * (yh.transpose() * &qh);
    largest_singular_value(&residual)
}

/// Gap `γ = ‖(I − Π_Y) Π_Q‖` between `range(Y)` and `range(Q)`, clamped to `[0, 1]`.
///
/// Both bases are mapped through `L⁻¹` and orthonormalized; `γ` is the largest singular
/// value of the part of `Q̂` not captured by `Ŷ`. This is the sine of the largest angle and
/// stays accurate when the angle is small.
pub fn gamma(a: &SpdOperator, y: &Mat, q: &Mat) -> Result<f64> {
    Ok(gamma_raw(a, y, q)?.clamp(0.0, 1.0))
}

/// `γ` through the explicit `n×n` operator `(I − Π_Y) Π_Q` and its `A⁻¹`-induced norm.
///
/// `Π_Y = Ŷ Ŷᵀ A⁻¹` with `Ŷ = L·orth(L⁻¹Y)`; `Π_Q = Q Qᵀ`. Meant for validation.
pub fn gamma_crosscheck(a: &SpdOperator, y: &Mat, q: &Mat) -> Result<f64> {
    let n = a.dim();
    let yh = a.chol() * whitened_orthonormal(a, y, "Y")?;
    let pi_q = q * q.transpose();
    let pi_y = &yh * a.solve(&yh).transpose();
    let op = (Mat::identity(n, n) - pi_y) * pi_q;
    Ok(op_norm_ainv(a, &op)?)
}

/// Subspace bound values for one `j`.
#[derive(Debug, Clone)]
pub struct SubspaceBound {
    /// `‖(I−Π_Q)(R_m − D★)‖ + γ ‖Π_Q(R_m − D★)‖`.
    pub b1: f64,
    /// `√2` times the optimal value of the stacked least-squares problem.
    pub ls_sqrt2: f64,
    /// `D★ = A V C★`.
    pub d_star: Mat,
    /// The stacked least-squares matrix had full column rank.
    pub well_posed: bool,
}

/// Subspace bound for `j = 0..=j_max` at a residual `R_m`.
///
/// For each `j`, `D` ranges over `A 𝕂_j(A, R_m)`. The coefficients minimize
/// `‖[L⁻¹(I−Π_Q); γ L⁻¹Π_Q](R_m − A V C)‖_F` and the two pieces of the minimizer are
/// added back without the `√2` weighting. The returned flag reports whether the Krylov
/// basis was truncated by an invariant subspace.
pub fn subspace_bound_series(
    a: &SpdOperator,
    r_m: &Mat,
    target: &DeflationTarget,
    gamma_m: f64,
    j_max: usize,
) -> Result<(Vec<SubspaceBound>, bool)> {
    let proj = target.projector();
    let kb = krylov_basis(a, r_m, j_max)?;
    let av = a.apply(&kb.basis);
    let s = r_m.ncols();
    let n = a.dim();
    let stack = |x: &Mat| -> Mat {
        let mut out = Mat::zeros(2 * n, x.ncols());
        out.rows_mut(0, n).copy_from(&a.whiten(&proj.complement(x)));
        out.rows_mut(n, n).copy_from(&(a.whiten(&proj.apply(x)) * gamma_m));
        out
    };
    let rhs = stack(r_m);
    let stacked_av = stack(&av);
    let mut out = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let cols = (j * s).min(kb.basis.ncols());
        let (d_star, ls_residual, well_posed) = if cols == 0 {
            (Mat::zeros(n, s), rhs.norm(), true)
        } else {
            let ls = least_squares(&stacked_av.columns(0, cols).into_owned(), &rhs)?;
            let d = av.columns(0, cols) * &ls.coeffs;
            (d, ls.residual_norm, ls.is_full_rank())
        };
        let e = r_m - &d_star;
        let b1 = a.whiten(&proj.complement(&e)).norm() + gamma_m * a.whiten(&proj.apply(&e)).norm();
        out.push(SubspaceBound {
            b1,
            ls_sqrt2: std::f64::consts::SQRT_2 * ls_residual,
            d_star,
            well_posed,
        });
    }
    Ok((out, kb.truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn projector_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = qr_tall(&random(6, 2, &mut rng)).unwrap().0;
        let p = SpectralProjector { q: &q };
        let inside = &q * random(2, 3, &mut rng);
        assert!((p.apply(&inside) - &inside).norm() < 1e-13);
        let v = random(6, 3, &mut rng);
        let outside = p.complement(&v);
        assert!(p.apply(&outside).norm() < 1e-13);
        assert!((p.apply(&p.apply(&v)) - p.apply(&v)).norm() < 1e-12);
    }

    #[test]
    fn gamma_of_same_subspace_is_zero() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let q = Mat::identity(5, 2);
        let rot = Mat::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let y = &q * rot;
        assert!(gamma(&a, &y, &q).unwrap() < 1e-14);
        assert!(gamma_crosscheck(&a, &y, &q).unwrap() < 1e-7);
        // A scaled eigenvector spans the same invariant subspace.
        assert!(gamma(&a, &a.apply(&q), &q).unwrap() < 1e-14);
    }

    #[test]
    fn gamma_of_orthogonal_subspace_is_one() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = Mat::identity(4, 1);
        let y = Mat::from_column_slice(4, 1, &[0.0, 1.0, 1.0, 0.0]);
        assert!((gamma(&a, &y, &q).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_crosscheck(&a, &y, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_case_matches_principal_angles() {
        let a = SpdOperator::new(Mat::identity(6, 6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..5 {
            let y = random(6, 2, &mut rng);
            let q = qr_tall(&random(6, 2, &mut rng)).unwrap().0;
            let qy = qr_tall(&y).unwrap().0;
            let cosines = (qy.transpose() * &q).singular_values();
            let oracle = (1.0 - cosines.min().powi(2)).max(0.0).sqrt();
            assert!((gamma(&a, &y, &q).unwrap() - oracle).abs() < 1e-10);
            assert!((gamma_crosscheck(&a, &y, &q).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_paths_agree_on_invariant_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let g = random(15, 15, &mut rng);
        let a = SpdOperator::new(g.transpose() * &g + Mat::identity(15, 15) * 0.1).unwrap();
        let dec = sym_eig(a.matrix()).unwrap();
        let target = DeflationTarget::new(&dec, 2, 1).unwrap();
        let y = &target.q + random(15, 3, &mut rng) * 0.05;
        let g1 = gamma(&a, &y, &target.q).unwrap();
        let g2 = gamma_crosscheck(&a, &y, &target.q).unwrap();
        assert!((g1 - g2).abs() <= 1e-8 * g1);
        assert!(g1 > 0.0 && g1 < 1.0);
        assert!(gamma_raw(&a, &y, &target.q).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn gamma_rank_collapse() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let q = Mat::identity(3, 2);
        let y = Mat::from_element(3, 2, 1.0);
        assert_eq!(gamma(&a, &y, &q), Err(BoundsError::RankCollapse { which: "Y" }));
    }

    #[test]
    fn ritz_subspace_needs_enough_values() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let ritz = RitzSet {
            step: 1,
            values: vec![1.5],
            vectors: Mat::from_element(3, 1, 1.0 / 3f64.sqrt()),
        };
        assert!(ritz_subspace_y(&a, &ritz, 1, 0).is_ok());
        assert!(matches!(
            ritz_subspace_y(&a, &ritz, 1, 1),
            Err(BoundsError::InsufficientRitz { needed: 2, available: 1 })
        ));
    }

    #[test]
    fn exact_deflation_reduces_to_comparison() {
        let lambdas: Vec<f64> = (1..=12).map(|i| f64::from(i) * 0.5).collect();
        let a = SpdOperator::from_diagonal(&lambdas).unwrap();
        let dec = sym_eig(a.matrix()).unwrap();
        let target = DeflationTarget::new(&dec, 1, 0).unwrap();
        let mut r = Mat::from_element(12, 1, 1.0);
        r[(0, 0)] = 0.0;
        let (series, _) = subspace_bound_series(&a, &r, &target, 0.0, 4).unwrap();
        let comparison = crate::krylov::comparison_process(&a, &r, 4).unwrap();
        for (b, c) in series.iter().zip(&comparison) {
            assert!((b.b1 - c).abs() <= 1e-10 * c.max(1e-300), "{} vs {}", b.b1, c);
        }
    }

    #[test]
    fn b1_sits_between_ls_optimum_and_its_sqrt2_multiple() {
        let lambdas: Vec<f64> = (1..=20).map(|i| f64::from(i * i) * 0.1).collect();
        let a = SpdOperator::from_diagonal(&lambdas).unwrap();
        let dec = sym_eig(a.matrix()).unwrap();
        let target = DeflationTarget::new(&dec, 2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = random(20, 2, &mut rng);
        let (series, truncated) = subspace_bound_series(&a, &r, &target, 0.4, 3).unwrap();
        assert!(!truncated);
        for b in &series {
            let ls = b.ls_sqrt2 / std::f64::consts::SQRT_2;
            assert!(b.b1 >= ls * (1.0 - 1e-12));
            assert!(b.b1 <= b.ls_sqrt2 * (1.0 + 1e-12));
            assert!(b.well_posed);
        }
    }
}
