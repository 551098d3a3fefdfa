use super::{KrylovError, LanczosState, Result, RitzSet};
use crate::linalg::{ainvf_norm, Mat, SpdOperator};

/// Knobs for [`block_cg_solve_with`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_m: usize,
    /// Target for `‖R_m‖_{A⁻¹-F}`.
    pub tol: f64,
    pub reorth: bool,
    /// Steps at which the solution `X_m` is stored and the residual recomputed directly.
    pub checkpoints: Vec<usize>,
    /// Direct residual recomputation period.
    pub check_every: usize,
    /// Turn non-convergence into an error.
    pub strict: bool,
}

impl SolveOptions {
    pub fn new(max_m: usize, tol: f64) -> Self {
        Self {
            max_m,
            tol,
            reorth: true,
            checkpoints: Vec::new(),
            check_every: 5,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    Converged,
    MaxSteps,
    /// The recurrence broke down with the residual still above tolerance. `step` is the
    /// index `i` of the remainder `M_i` that lost rank.
    Breakdown { step: usize },
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub m: usize,
    pub residual: Mat,
    pub residual_norm: f64,
}

/// Everything recorded by one block CG run.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub steps: Vec<StepRecord>,
    /// `None` only when `R_0` already met the tolerance.
    pub lanczos: Option<LanczosState>,
    pub stop: StopReason,
    pub x0: Mat,
    pub solution: Mat,
    pub checkpoints: Vec<(usize, Mat)>,
    /// Largest `‖R_shortcut − (B − A X_m)‖_F / ‖R_0‖_F` seen at the direct checks.
    pub max_shortcut_gap: f64,
}

impl SolveTrace {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// Last completed step.
    pub fn iterations(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.residual_norm).collect()
    }

    pub fn residual(&self, m: usize) -> Result<&Mat> {
        self.record(m).map(|r| &r.residual)
    }

    pub fn residual_norm(&self, m: usize) -> Result<f64> {
        self.record(m).map(|r| r.residual_norm)
    }

    fn record(&self, m: usize) -> Result<&StepRecord> {
        self.steps.get(m).ok_or(KrylovError::StepUnavailable {
            m,
            available: self.iterations(),
        })
    }

    fn state(&self, m: usize) -> Result<&LanczosState> {
        self.lanczos.as_ref().ok_or(KrylovError::StepUnavailable { m, available: 0 })
    }

    pub fn ritz(&self, m: usize) -> Result<RitzSet> {
        self.record(m)?;
        self.state(m)?.ritz(m)
    }

    pub fn ritz_values(&self, m: usize) -> Result<Vec<f64>> {
        self.record(m)?;
        if m == 0 {
            return Ok(Vec::new());
        }
        self.state(m)?.ritz_values(m)
    }

    /// `X_m = X_0 + W_m Y_m`, recomputed from the stored recurrence.
    pub fn solution_at(&self, m: usize) -> Result<Mat> {
        self.record(m)?;
        if m == 0 {
            return Ok(self.x0.clone());
        }
        let st = self.state(m)?;
        let y = st.tridiagonal(m)?.solve_first_block()?;
        Ok(&self.x0 + st.basis(m) * y)
    }
}

/// Block CG with default options; fails with [`KrylovError::NoConvergence`] when `tol`
/// is not reached within `max_m` steps.
pub fn block_cg_solve(a: &SpdOperator, b: &Mat, x0: &Mat, max_m: usize, tol: f64) -> Result<SolveTrace> {
    let mut opts = SolveOptions::new(max_m, tol);
    opts.strict = true;
    block_cg_solve_with(a, b, x0, &opts)
}

/// Block CG for `A X = B` driven by block Lanczos.
///
/// At step `m` the projected system `T_m Y = E_1 ℬ_0` is solved densely and the residual
/// is taken as `R_m = −M_{m-1} Y_m^{(m)}`, with `Y_m^{(m)}` the last block row of `Y_m`.
pub fn block_cg_solve_with(a: &SpdOperator, b: &Mat, x0: &Mat, opts: &SolveOptions) -> Result<SolveTrace> {
    a.check_block(b)?;
    a.check_block(x0)?;
    if x0.ncols() != b.ncols() {
        return Err(crate::linalg::LinalgError::DimensionMismatch {
            expected: b.shape(),
            got: x0.shape(),
        }
        .into());
    }
    let s = b.ncols();
    let r0 = b - a.apply(x0);
    let r0_norm = ainvf_norm(a, &r0)?;
    let r0_frob = r0.norm();
    let mut steps = vec![StepRecord {
        m: 0,
        residual: r0.clone(),
        residual_norm: r0_norm,
    }];
    if r0_norm <= opts.tol {
        return Ok(SolveTrace {
            steps,
            lanczos: None,
            stop: StopReason::Converged,
            x0: x0.clone(),
            solution: x0.clone(),
            checkpoints: Vec::new(),
            max_shortcut_gap: 0.0,
        });
    }
    let mut state = LanczosState::new(a, &r0, opts.reorth)?;
    let mut checkpoints = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut stop = StopReason::MaxSteps;
    let mut solution = x0.clone();
    for m in 1..=opts.max_m {
        let broke = match state.step(a) {
            Ok(()) => false,
            Err(KrylovError::Breakdown { .. }) => true,
            Err(e) => return Err(e),
        };
        let y = state.tridiagonal(m)?.solve_first_block()?;
        let last = y.rows((m - 1) * s, s);
        let residual = -(state.remainder(m - 1) * last);
        let residual_norm = ainvf_norm(a, &residual)?;
        let done = residual_norm <= opts.tol || broke || m == opts.max_m;
        let wanted = opts.checkpoints.contains(&m);
        if done || wanted || (opts.check_every > 0 && m % opts.check_every == 0) {
            let x = x0 + state.basis(m) * &y;
            let direct = b - a.apply(&x);
            let gap = if r0_frob > 0.0 {
                (&residual - direct).norm() / r0_frob
            } else {
                0.0
            };
            max_gap = max_gap.max(gap);
            if wanted {
                checkpoints.push((m, x.clone()));
            }
            if done {
                solution = x;
            }
        }
        steps.push(StepRecord {
            m,
            residual,
            residual_norm,
        });
        if residual_norm <= opts.tol {
            stop = StopReason::Converged;
            break;
        }
        if broke {
            stop = StopReason::Breakdown { step: m - 1 };
            break;
        }
    }
    if opts.strict {
        match stop {
            StopReason::Converged => {}
            StopReason::MaxSteps => return Err(KrylovError::NoConvergence { max_m: opts.max_m }),
            StopReason::Breakdown { .. } => {
                let b = state.breakdown().expect("breakdown recorded");
                return Err(KrylovError::Breakdown {
                    step: b.step,
                    column: b.column,
                    magnitude: b.magnitude,
                });
            }
        }
    }
    Ok(SolveTrace {
        steps,
        lanczos: Some(state),
        stop,
        x0: x0.clone(),
        solution,
        checkpoints,
        max_shortcut_gap: max_gap,
    })
}

/// Residual norms `‖R̄_j‖_{A⁻¹-F}`, `j = 0..=j_max`, of block CG started from zero on
/// `A E = R̄_0`.
///
/// If the recurrence terminates early the last norm is repeated.
pub fn comparison_process(a: &SpdOperator, rbar0: &Mat, j_max: usize) -> Result<Vec<f64>> {
    a.check_block(rbar0)?;
    if rbar0.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; j_max + 1]);
    }
    let zero = Mat::zeros(rbar0.nrows(), rbar0.ncols());
    let trace = block_cg_solve_with(a, rbar0, &zero, &SolveOptions::new(j_max, 0.0))?;
    let mut norms = trace.residual_norms();
    let last = *norms.last().expect("at least R_0");
    norms.resize(j_max + 1, last);
    Ok(norms)
}
