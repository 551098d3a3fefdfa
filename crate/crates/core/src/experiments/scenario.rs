use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrices::{
    clustered_spectrum_values, four_small_spectrum, ic0, isolated_spectrum, multiplicity_spectrum_values,
    poisson2d, preconditioned_operator, spectrum_matrix,
};
use super::onset::superlinearity_onset;
use super::{ExperimentError, Result};
use crate::bounds::{compute_bound_series, BoundConfig, BoundSeries, BoundsError};
use crate::krylov::{block_cg_solve_with, SolveOptions, SolveTrace, StopReason};
use crate::linalg::{sym_eig, Mat, SpdOperator, SpectralDecomposition};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const ONSET_WINDOW: usize = 3;
pub const SCENARIO_IDS: [&str; 6] = ["ex4.1", "ex4.2", "ex4.3", "ex4.4", "ex4.5", "ex4.6"];

/// How the coefficient matrix is built.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixRecipe {
    /// Diagonal matrix with these eigenvalues (ascending).
    Spectrum(Vec<f64>),
    /// Five-point Laplacian on a `grid × grid` mesh, optionally with symmetric IC(0)
    /// preconditioning applied explicitly.
    Poisson { grid: usize, ic0: bool },
}

impl MatrixRecipe {
    pub fn dim(&self) -> usize {
        match self {
            MatrixRecipe::Spectrum(v) => v.len(),
            MatrixRecipe::Poisson { grid, .. } => grid * grid,
        }
    }
}

/// A fully specified run: matrix, block size, starting guess and bound grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub recipe: MatrixRecipe,
    pub s: usize,
    pub tol: f64,
    /// Defaults to `⌈n/s⌉ + 1`.
    pub max_m: Option<usize>,
    pub seed: u64,
    pub configs: Vec<BoundConfig>,
    /// Record the extreme Ritz values at every step.
    pub ritz_extremes: bool,
}

fn configs(steps: &[usize], j_max: usize, k1: usize, k2: usize) -> Vec<BoundConfig> {
    steps.iter().map(|&m| BoundConfig::new(m, j_max, k1, k2)).collect()
}

impl Scenario {
    /// A scenario with no bound configurations.
    pub fn custom(id: impl Into<String>, recipe: MatrixRecipe, s: usize) -> Self {
        Self {
            id: id.into(),
            recipe,
            s,
            tol: DEFAULT_TOL,
            max_m: None,
            seed: DEFAULT_SEED,
            configs: Vec::new(),
            ritz_extremes: true,
        }
    }

    /// Registry entry for `id` at block size `s`. Block sizes without a default bound grid
    /// get an empty one.
    pub fn from_registry(id: &str, s: usize) -> Result<Self> {
        let (recipe, (k1, k2)) = match id {
            "ex4.1" => (MatrixRecipe::Spectrum(four_small_spectrum()), (1, 0)),
            "ex4.2" => (MatrixRecipe::Spectrum(four_small_spectrum()), (4, 0)),
            "ex4.3" => (MatrixRecipe::Spectrum(isolated_spectrum()), (1, 0)),
            "ex4.4" => (MatrixRecipe::Spectrum(clustered_spectrum_values()), (6, 0)),
            "ex4.5" => (MatrixRecipe::Spectrum(multiplicity_spectrum_values()), (1, 0)),
            "ex4.6" => (MatrixRecipe::Poisson { grid: 20, ic0: true }, (1, 0)),
            other => return Err(ExperimentError::UnknownScenario(other.to_string())),
        };
        let grid = match (id, s) {
            ("ex4.1", 1) => configs(&[20, 21, 22, 23, 24, 31, 32, 33, 34, 35], 10, k1, k2),
            ("ex4.2", 1) => configs(&[38, 39, 40, 41, 42, 43, 44, 45, 50], 5, k1, k2),
            ("ex4.3", 1) => configs(&[20, 30, 40], 10, k1, k2),
            ("ex4.3", 4) => configs(&[15, 25, 35], 10, k1, k2),
            ("ex4.3", 8) => configs(&[10, 20, 30], 10, k1, k2),
            ("ex4.4", 1) => configs(&[60, 90, 110], 10, k1, k2),
            ("ex4.4", 2) => configs(&[40, 60, 80], 10, k1, k2),
            ("ex4.4", 4) => configs(&[30, 45, 55], 10, k1, k2),
            ("ex4.4", 8) => configs(&[20, 30, 35], 10, k1, k2),
            ("ex4.5", 1) => [(1, 0), (1, 1), (2, 0)]
                .iter()
                .flat_map(|&(a, b)| configs(&[80], 10, a, b))
                .collect(),
            ("ex4.5", 4) => [4, 5].iter().flat_map(|&a| configs(&[50], 10, a, 0)).collect(),
            ("ex4.6", 1) => [1, 2].iter().flat_map(|&a| configs(&[10], 10, a, 0)).collect(),
            ("ex4.6", 4) => [4, 5].iter().flat_map(|&a| configs(&[6], 10, a, 0)).collect(),
            _ => Vec::new(),
        };
        let mut sc = Self::custom(id, recipe, s);
        sc.configs = grid;
        Ok(sc)
    }

    /// Deflation counts `(k1, k2)` used by default for a registry id.
    pub fn default_k(id: &str) -> Option<(usize, usize)> {
        match id {
            "ex4.1" | "ex4.3" | "ex4.5" | "ex4.6" => Some((1, 0)),
            "ex4.2" => Some((4, 0)),
            "ex4.4" => Some((6, 0)),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.recipe.dim()
    }

    pub fn effective_max_m(&self) -> usize {
        self.max_m.unwrap_or_else(|| self.dim().div_ceil(self.s) + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.s == 0 || self.s > self.dim() {
            return Err(ExperimentError::Invalid(format!(
                "block size {} out of range for n = {}",
                self.s,
                self.dim()
            )));
        }
        if !(self.tol > 0.0) {
            return Err(ExperimentError::Invalid(format!("tolerance {} must be positive", self.tol)));
        }
        if let MatrixRecipe::Poisson { grid, .. } = self.recipe {
            if grid < 2 {
                return Err(ExperimentError::Invalid(format!("grid {grid} must be at least 2")));
            }
        }
        Ok(())
    }
}

/// Operator together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct Problem {
    pub operator: SpdOperator,
    pub decomposition: SpectralDecomposition,
}

pub fn build_problem(recipe: &MatrixRecipe) -> Result<Problem> {
    match recipe {
        MatrixRecipe::Spectrum(values) => {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let operator = spectrum_matrix(&sorted)?;
            let n = sorted.len();
            Ok(Problem {
                operator,
                decomposition: SpectralDecomposition {
                    eigenvalues: sorted,
                    eigenvectors: Mat::identity(n, n),
                },
            })
        }
        MatrixRecipe::Poisson { grid, ic0: precondition } => {
            let a = poisson2d(*grid);
            let operator = if *precondition {
                let l = ic0(&a)?;
                preconditioned_operator(&a, &l)?
            } else {
                SpdOperator::new(a)?
            };
            let decomposition = sym_eig(operator.matrix())?;
            Ok(Problem {
                operator,
                decomposition,
            })
        }
    }
}

/// Zero for `s = 1`; otherwise i.i.d. standard normal entries drawn column by column
/// from a single seeded stream.
pub fn initial_guess(n: usize, s: usize, seed: u64) -> Mat {
    if s == 1 {
        return Mat::zeros(n, 1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Mat::zeros(n, s);
    for c in 0..s {
        for r in 0..n {
            x[(r, c)] = StandardNormal.sample(&mut rng);
        }
    }
    x
}

/// Outcome of one bound configuration.
#[derive(Debug, Clone)]
pub struct ConfigOutcome {
    pub config: BoundConfig,
    pub result: std::result::Result<BoundSeries, BoundsError>,
}

/// Everything produced by [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub scenario: Scenario,
    pub problem: Problem,
    pub trace: SolveTrace,
    /// Smallest and largest Ritz value per step; `None` at step 0 or when not recorded.
    pub ritz_extremes: Vec<Option<(f64, f64)>>,
    pub onset: Option<usize>,
    pub bounds: Vec<ConfigOutcome>,
}

impl RunArtifact {
    pub fn residual_norms(&self) -> Vec<f64> {
        self.trace.residual_norms()
    }

    pub fn iterations(&self) -> usize {
        self.trace.iterations()
    }

    pub fn converged(&self) -> bool {
        self.trace.stop == StopReason::Converged
    }

    pub fn all_configs_ok(&self) -> bool {
        self.bounds.iter().all(|c| c.result.is_ok())
    }

    /// The series for the first configuration matching `(m, k1, k2)`.
    pub fn series(&self, m: usize, k1: usize, k2: usize) -> Option<&BoundSeries> {
        self.bounds
            .iter()
            .find(|c| c.config.m == m && c.config.k1 == k1 && c.config.k2 == k2)
            .and_then(|c| c.result.as_ref().ok())
    }
}

/// Builds the problem, runs block CG on `A X = ones(n×s)` and evaluates every bound
/// configuration. Configuration failures are recorded, not propagated.
pub fn run_scenario(sc: &Scenario) -> Result<RunArtifact> {
    sc.validate()?;
    let problem = build_problem(&sc.recipe)?;
    let n = sc.dim();
    let b = Mat::from_element(n, sc.s, 1.0);
    let x0 = initial_guess(n, sc.s, sc.seed);
    let mut opts = SolveOptions::new(sc.effective_max_m(), sc.tol);
    opts.checkpoints = sc.configs.iter().map(|c| c.m).collect();
    let trace = block_cg_solve_with(&problem.operator, &b, &x0, &opts)?;

    let mut ritz_extremes = vec![None; trace.iterations() + 1];
    if sc.ritz_extremes {
        for (m, slot) in ritz_extremes.iter_mut().enumerate().skip(1) {
            let values = trace.ritz_values(m)?;
            if let (Some(lo), Some(hi)) = (values.first(), values.last()) {
                *slot = Some((*lo, *hi));
            }
        }
    }
    let onset = superlinearity_onset(&trace.residual_norms(), ONSET_WINDOW);
    let bounds = sc
        .configs
        .iter()
        .map(|cfg| ConfigOutcome {
            config: *cfg,
            result: compute_bound_series(&problem.operator, &problem.decomposition, &trace, cfg),
        })
        .collect();
    Ok(RunArtifact {
        scenario: sc.clone(),
        problem,
        trace,
        ritz_extremes,
        onset,
        bounds,
    })
}

/// Pearson correlation of `ln a` against `ln b` over entries where both are positive.
pub fn log_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let k = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
