use super::{KrylovError, Result, RitzSet};
use crate::linalg::{cholesky_factor, qr_tall, qr_tall_with_reference, solve_lower, solve_lower_transpose, sym_eig, LinalgError, Mat, SpdOperator};

/// Block tridiagonal projection `T_m` of the operator onto the Lanczos basis.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    /// Diagonal blocks `𝒜_0..𝒜_{m-1}`.
    pub diag: Vec<Mat>,
    /// Subdiagonal blocks `ℬ_1..ℬ_{m-1}` (upper triangular).
    pub sub: Vec<Mat>,
    /// Triangular factor of the starting block, `R_0 = U_0 ℬ_0`.
    pub b0: Mat,
}

impl BlockTridiagonal {
    pub fn steps(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.b0.nrows()
    }

    /// Dense `ms×ms` matrix.
    pub fn assemble(&self) -> Mat {
        let s = self.block_size();
        let m = self.steps();
        let mut t = Mat::zeros(m * s, m * s);
        for (i, a) in self.diag.iter().enumerate() {
            t.view_mut((i * s, i * s), (s, s)).copy_from(a);
        }
        for (i, b) in self.sub.iter().enumerate() {
            t.view_mut(((i + 1) * s, i * s), (s, s)).copy_from(b);
            t.view_mut((i * s, (i + 1) * s), (s, s)).copy_from(&b.transpose());
        }
        t
    }

    /// Solves `T_m Y = E_1 ℬ_0` by a dense Cholesky factorization.
    pub fn solve_first_block(&self) -> Result<Mat> {
        let s = self.block_size();
        let m = self.steps();
        let l = cholesky_factor(&self.assemble()).map_err(|e| match e {
            LinalgError::NotPositiveDefinite { .. } => KrylovError::TmNotPositiveDefinite { m },
            other => other.into(),
        })?;
        let mut rhs = Mat::zeros(m * s, s);
        rhs.view_mut((0, 0), (s, s)).copy_from(&self.b0);
        Ok(solve_lower_transpose(&l, &solve_lower(&l, &rhs)))
    }
}

/// Where and how the recurrence lost rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    /// Index `i` of the remainder `M_i` that was rank deficient.
    pub step: usize,
    pub column: usize,
    pub magnitude: f64,
}

/// Block Lanczos recurrence with optional full reorthogonalization.
///
/// After `m` steps the state holds `U_0..U_m`, `𝒜_0..𝒜_{m-1}`, `ℬ_1..ℬ_m` and the raw
/// remainders `M_0..M_{m-1}`. After a breakdown the last `U` and `ℬ` are missing and
/// the state accepts no further steps.
#[derive(Debug, Clone)]
pub struct LanczosState {
    basis: Vec<Mat>,
    diag: Vec<Mat>,
    betas: Vec<Mat>,
    remainders: Vec<Mat>,
    b0: Mat,
    reorth: bool,
    breakdown: Option<Breakdown>,
}

/// Starts the recurrence from `R_0 = U_0 ℬ_0` with full reorthogonalization.
pub fn lanczos_init(a: &SpdOperator, r0: &Mat) -> Result<LanczosState> {
    LanczosState::new(a, r0, true)
}

impl LanczosState {
    pub fn new(a: &SpdOperator, r0: &Mat, reorth: bool) -> Result<Self> {
        a.check_block(r0)?;
        let (u0, b0) = qr_tall(r0)?;
        Ok(Self {
            basis: vec![u0],
            diag: Vec::new(),
            betas: Vec::new(),
            remainders: Vec::new(),
            b0,
            reorth,
            breakdown: None,
        })
    }

    /// Number of completed steps `m`.
    pub fn steps(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.b0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn reorthogonalizes(&self) -> bool {
        self.reorth
    }

    pub fn breakdown(&self) -> Option<Breakdown> {
        self.breakdown
    }

    pub fn b0(&self) -> &Mat {
        &self.b0
    }

    /// Basis block `U_i`.
    pub fn block(&self, i: usize) -> &Mat {
        &self.basis[i]
    }

    /// Number of stored basis blocks.
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// `ℬ_i` for `i ≥ 1`.
    pub fn beta(&self, i: usize) -> &Mat {
        &self.betas[i - 1]
    }

    /// Raw remainder `M_i = U_{i+1} ℬ_{i+1}` before its QR.
    pub fn remainder(&self, i: usize) -> &Mat {
        &self.remainders[i]
    }

    /// `W_m = [U_0 … U_{m-1}]`.
    pub fn basis(&self, m: usize) -> Mat {
        let n = self.dim();
        let s = self.block_size();
        let mut w = Mat::zeros(n, m * s);
        for (i, u) in self.basis.iter().take(m).enumerate() {
            w.columns_mut(i * s, s).copy_from(u);
        }
        w
    }

    /// Leading `m`-step projection `T_m`.
    pub fn tridiagonal(&self, m: usize) -> Result<BlockTridiagonal> {
        self.check_step(m)?;
        Ok(BlockTridiagonal {
            diag: self.diag[..m].to_vec(),
            sub: self.betas[..m.saturating_sub(1)].to_vec(),
            b0: self.b0.clone(),
        })
    }

    fn check_step(&self, m: usize) -> Result<()> {
        if m > self.steps() {
            return Err(KrylovError::StepUnavailable {
                m,
                available: self.steps(),
            });
        }
        Ok(())
    }

    /// Ritz values and lifted Ritz vectors of `T_m`.
    pub fn ritz(&self, m: usize) -> Result<RitzSet> {
        if m == 0 {
            return Err(KrylovError::StepUnavailable {
                m,
                available: self.steps(),
            });
        }
        let t = self.tridiagonal(m)?;
        let dec = sym_eig(&t.assemble())?;
        let vectors = self.basis(m) * dec.eigenvectors;
        Ok(RitzSet {
            step: m,
            values: dec.eigenvalues,
            vectors,
        })
    }

    /// Ritz values of `T_m` only.
    pub fn ritz_values(&self, m: usize) -> Result<Vec<f64>> {
        if m == 0 {
            return Ok(Vec::new());
        }
        Ok(crate::linalg::sym_eigvals(&self.tridiagonal(m)?.assemble())?)
    }

    /// Advances one block step.
    ///
    /// A rank-deficient remainder records a [`Breakdown`], still appends `𝒜_i` and `M_i`,
    /// and returns [`KrylovError::Breakdown`]. Any later call returns the same error.
    pub fn step(&mut self, a: &SpdOperator) -> Result<()> {
        if let Some(b) = self.breakdown {
            return Err(KrylovError::Breakdown {
                step: b.step,
                column: b.column,
                magnitude: b.magnitude,
            });
        }
        let i = self.steps();
        let u = &self.basis[i];
        let w = a.apply(u);
        let reference = w.norm();
        let ai = u.transpose() * &w;
        let ai = (&ai + ai.transpose()) * 0.5;
        let mut m = w - u * &ai;
        if i > 0 {
            m -= &self.basis[i - 1] * self.betas[i - 1].transpose();
        }
        if self.reorth {
            for _ in 0..2 {
                let coeffs: Vec<Mat> = self.basis.iter().map(|ub| ub.transpose() * &m).collect();
                for (ub, c) in self.basis.iter().zip(&coeffs) {
                    m -= ub * c;
                }
            }
        }
        self.diag.push(ai);
        let qr = qr_tall_with_reference(&m, reference);
        self.remainders.push(m);
        match qr {
            Ok((q, r)) => {
                self.basis.push(q);
                self.betas.push(r);
                Ok(())
            }
            Err(LinalgError::RankDeficient { column, magnitude }) => {
                let b = Breakdown {
                    step: i,
                    column,
                    magnitude,
                };
                self.breakdown = Some(b);
                Err(KrylovError::Breakdown {
                    step: i,
                    column,
                    magnitude,
                })
            }
            Err(e) => Err(e.into()),
        }
    }

    /// `‖A W_m − W_m T_m − M_{m-1} E_mᵀ‖_F`.
    pub fn relation_residual(&self, a: &SpdOperator, m: usize) -> Result<f64> {
        self.check_step(m)?;
        if m == 0 {
            return Ok(0.0);
        }
        let s = self.block_size();
        let w = self.basis(m);
        let t = self.tridiagonal(m)?.assemble();
        let mut r = a.apply(&w) - &w * t;
        let mut last = r.columns_mut((m - 1) * s, s);
        last -= &self.remainders[m - 1];
        Ok(r.norm())
    }
}

/// Orthonormal basis of a block Krylov subspace.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    /// `n × (blocks·s)` orthonormal columns.
    pub basis: Mat,
    pub requested: usize,
    pub blocks: usize,
    /// The subspace became invariant before `requested` blocks were found.
    pub truncated: bool,
}

/// Orthonormal basis of `𝕂_j(A, R_0) = span{R_0, A R_0, …, A^{j-1} R_0}`.
pub fn krylov_basis(a: &SpdOperator, r0: &Mat, j: usize) -> Result<KrylovBasis> {
    a.check_block(r0)?;
    if j == 0 {
        return Ok(KrylovBasis {
            basis: Mat::zeros(r0.nrows(), 0),
            requested: 0,
            blocks: 0,
            truncated: false,
        });
    }
    let mut state = lanczos_init(a, r0)?;
    let mut truncated = false;
    while state.basis_len() < j {
        match state.step(a) {
            Ok(()) => {}
            Err(KrylovError::Breakdown { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let blocks = state.basis_len().min(j);
    Ok(KrylovBasis {
        basis: state.basis(blocks),
        requested: j,
        blocks,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    fn random_spd(n: usize, seed: u64) -> SpdOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random(n, n, &mut rng);
        SpdOperator::new(g.transpose() * &g + Mat::identity(n, n)).unwrap()
    }

    #[test]
    fn init_small_cases() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let r0 = Mat::identity(3, 2);
        let st = lanczos_init(&a, &r0).unwrap();
        assert!((st.block(0) - &r0).norm() < 1e-15);
        assert!((st.b0() - Mat::identity(2, 2)).norm() < 1e-15);

        let a = SpdOperator::from_diagonal(&[1.0, 2.0]).unwrap();
        let st = lanczos_init(&a, &Mat::from_column_slice(2, 1, &[3.0, 4.0])).unwrap();
        assert!((st.block(0)[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((st.b0()[(0, 0)] - 5.0).abs() < 1e-15);

        let a = SpdOperator::from_diagonal(&vec![1.0; 100]).unwrap();
        let st = lanczos_init(&a, &Mat::from_element(100, 1, 1.0)).unwrap();
        assert!((st.b0()[(0, 0)] - 10.0).abs() < 1e-13);
    }

    #[test]
    fn init_rejects_dependent_columns() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            lanczos_init(&a, &Mat::from_element(3, 2, 1.0)),
            Err(KrylovError::Linalg(LinalgError::RankDeficient { column: 1, .. }))
        ));
    }

    #[test]
    fn identity_breaks_down_immediately() {
        let a = SpdOperator::new(Mat::identity(4, 4)).unwrap();
        let mut st = lanczos_init(&a, &Mat::from_element(4, 1, 1.0)).unwrap();
        assert!(matches!(st.step(&a), Err(KrylovError::Breakdown { step: 0, .. })));
        assert_eq!(st.steps(), 1);
        assert!(st.breakdown().is_some());
        assert!(st.step(&a).is_err());
    }

    #[test]
    fn first_diagonal_block_is_rayleigh_quotient() {
        let a = SpdOperator::from_diagonal(&[1.0, 2.0]).unwrap();
        let r0 = Mat::from_element(2, 1, 1.0 / 2f64.sqrt());
        let mut st = lanczos_init(&a, &r0).unwrap();
        st.step(&a).unwrap();
        let t = st.tridiagonal(1).unwrap();
        assert!((t.diag[0][(0, 0)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn orthonormality_and_relation() {
        let a = random_spd(30, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r0 = random(30, 3, &mut rng);
        let mut st = lanczos_init(&a, &r0).unwrap();
        for m in 1..=8 {
            st.step(&a).unwrap();
            let w = st.basis(m);
            assert!((w.transpose() * &w - Mat::identity(3 * m, 3 * m)).norm() <= 1e-8);
            let rel = st.relation_residual(&a, m).unwrap();
            assert!(rel <= 1e-9 * a.spectral_norm() * w.norm(), "m={m} rel={rel}");
            assert!(st.beta(m).upper_triangle() == *st.beta(m));
        }
        let t = st.tridiagonal(8).unwrap().assemble();
        assert_eq!(t, t.transpose());
    }

    #[test]
    fn full_dimension_ritz_values_are_eigenvalues() {
        let lambdas = [0.5, 1.0, 2.0, 3.5, 4.0, 7.0];
        let a = SpdOperator::from_diagonal(&lambdas).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r0 = random(6, 2, &mut rng);
        let mut st = lanczos_init(&a, &r0).unwrap();
        for _ in 0..3 {
            let _ = st.step(&a);
        }
        let ritz = st.ritz(3).unwrap();
        for (t, l) in ritz.values.iter().zip(&lambdas) {
            assert!((t - l).abs() < 1e-8);
        }
        for c in ritz.vectors.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn krylov_basis_cases() {
        let a = random_spd(10, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let r0 = random(10, 2, &mut rng);
        let kb = krylov_basis(&a, &r0, 1).unwrap();
        assert!((kb.basis - qr_tall(&r0).unwrap().0).norm() < 1e-14);

        let kb = krylov_basis(&a, &r0, 3).unwrap();
        assert_eq!(kb.basis.ncols(), 6);
        let ar0 = a.apply(&r0);
        let a2r0 = a.apply(&ar0);
        let mut stacked = Mat::zeros(10, 6);
        stacked.columns_mut(0, 2).copy_from(&r0);
        stacked.columns_mut(2, 2).copy_from(&ar0);
        stacked.columns_mut(4, 2).copy_from(&a2r0);
        let proj = &kb.basis * (kb.basis.transpose() * &stacked);
        assert!((proj - &stacked).norm() <= 1e-9 * stacked.norm());
        let sv = stacked.singular_values();
        assert!(sv.min() > 1e-10 * sv.max());

        let d = SpdOperator::from_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let e1 = Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        let kb = krylov_basis(&d, &e1, 3).unwrap();
        assert_eq!(kb.basis.ncols(), 1);
        assert!(kb.truncated);
        assert_eq!(krylov_basis(&d, &e1, 0).unwrap().basis.ncols(), 0);
    }
}
