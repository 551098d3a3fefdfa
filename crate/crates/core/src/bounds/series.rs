use super::{
    alpha_factor, gamma, ritz_subspace_y, subspace_bound_series, AlphaFactor, BoundsError, DeflationTarget, Result,
};
use crate::krylov::{comparison_process, SolveTrace};
use crate::linalg::{ainvf_norm, SpdOperator, SpectralDecomposition};

/// Where to evaluate the bounds: outer step `m`, horizon `j_max` and the deflation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundConfig {
    pub m: usize,
    pub j_max: usize,
    pub k1: usize,
    pub k2: usize,
    /// Treat the `k1` lowest eigenvalues as one repeated eigenvalue in `α`.
    pub multiplicity: bool,
}

impl BoundConfig {
    pub fn new(m: usize, j_max: usize, k1: usize, k2: usize) -> Self {
        Self {
            m,
            j_max,
            k1,
            k2,
            multiplicity: false,
        }
    }
}

/// Both bounds for `j = 0..=j_max` together with the quantities that produced them.
#[derive(Debug, Clone)]
pub struct BoundSeries {
    pub config: BoundConfig,
    pub gamma_m: f64,
    pub alpha: AlphaFactor,
    /// `θ_1..θ_{k1}` followed by the `k2` largest Ritz values at step `m`.
    pub theta: Vec<f64>,
    pub b1: Vec<f64>,
    pub b1_ls_sqrt2: Vec<f64>,
    pub b2: Vec<f64>,
    /// `‖R̄_j‖_{A⁻¹-F}`.
    pub comparison: Vec<f64>,
    /// `‖R_{m+j}‖_{A⁻¹-F}`.
    pub actual: Vec<f64>,
    /// The Krylov parameterization of `b1` hit an invariant subspace early.
    pub krylov_truncated: bool,
    /// Every least-squares problem behind `b1` had full column rank.
    pub well_posed: bool,
}

impl BoundSeries {
    pub fn len(&self) -> usize {
        self.b1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b1.is_empty()
    }
}

/// Evaluates `γ_m`, `α`, `b1`, `b2` and the comparison process for one configuration.
///
/// The trace must contain steps up to `m + j_max`.
pub fn compute_bound_series(
    a: &SpdOperator,
    decomposition: &SpectralDecomposition,
    trace: &SolveTrace,
    config: &BoundConfig,
) -> Result<BoundSeries> {
    let BoundConfig { m, j_max, k1, k2, .. } = *config;
    let available = trace.iterations();
    if m == 0 || m + j_max > available {
        return Err(BoundsError::HorizonBeyondTrace {
            needed: m + j_max,
            available,
        });
    }
    let target = DeflationTarget::new(decomposition, k1, k2)?;
    let ritz = trace.ritz(m)?;
    let y = ritz_subspace_y(a, &ritz, k1, k2)?;
    let gamma_m = gamma(a, &y, &target.q)?;
    let alpha = alpha_factor(&target.lambdas, &ritz.values, k1, k2, config.multiplicity)?;

    let r_m = trace.residual(m)?;
    let (sub, krylov_truncated) = subspace_bound_series(a, r_m, &target, gamma_m, j_max)?;
    let rbar0 = target.projector().complement(r_m);
    let comparison = comparison_process(a, &rbar0, j_max)?;
    let actual = (0..=j_max)
        .map(|j| trace.residual_norm(m + j))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mut theta: Vec<f64> = ritz.values[..k1].to_vec();
    theta.extend_from_slice(&ritz.values[ritz.len() - k2..]);
    Ok(BoundSeries {
        config: *config,
        gamma_m,
        alpha,
        theta,
        b1: sub.iter().map(|s| s.b1).collect(),
        b1_ls_sqrt2: sub.iter().map(|s| s.ls_sqrt2).collect(),
        b2: comparison.iter().map(|c| alpha.value * c).collect(),
        well_posed: sub.iter().all(|s| s.well_posed),
        comparison,
        actual,
        krylov_truncated,
    })
}

/// Relative gap between `Σ_i λ_i⁻¹ ‖row_i(Vᵀ R_m)‖²` and `‖R_m‖²_{A⁻¹-F}`.
pub fn trace_identity_check(
    a: &SpdOperator,
    decomposition: &SpectralDecomposition,
    trace: &SolveTrace,
    m: usize,
) -> Result<f64> {
    let r = trace.residual(m)?;
    let direct = ainvf_norm(a, r)?.powi(2);
    let coords = decomposition.eigenvectors.transpose() * r;
    let spectral: f64 = decomposition
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, lam)| coords.row(i).norm_squared() / lam)
        .sum();
    let gap = (spectral - direct).abs();
    Ok(if direct > 0.0 { gap / direct } else { gap })
}
