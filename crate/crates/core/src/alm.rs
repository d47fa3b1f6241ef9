//! Augmented Lagrangian method with a semismooth Newton inner solver.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::problem::{
    aug_lagrangian_grad, aug_lagrangian_value, kkt_residual, multiplier_maps, newton_matrix_element, KktPoint,
    KktResidual, MultiplierTriple, NewtonChoices, ProblemOracle,
};
use crate::spectral::lambda_min;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InnerConfig {
    pub grad_tol: f64,
    /// Fraction of the previous outer residual used as the forcing tolerance.
    pub grad_tol_rel: f64,
    pub max_iter: usize,
    pub armijo_sigma: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub levenberg_shift_initial: f64,
    pub max_shift_doublings: usize,
    pub pd_floor: f64,
    pub choices: NewtonChoices,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            grad_tol_rel: 1e-3,
            max_iter: 100,
            armijo_sigma: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            levenberg_shift_initial: 1e-8,
            max_shift_doublings: 20,
            pd_floor: 1e-10,
            choices: NewtonChoices::default(),
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.grad_tol, self.grad_tol_rel, self.levenberg_shift_initial, self.pd_floor];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || self.max_iter == 0 {
            return Err(Error::invalid("inner config: tolerances and limits must be positive"));
        }
        if !(self.armijo_sigma > 0.0 && self.armijo_sigma < 0.5) {
            return Err(Error::invalid("inner config: Armijo slope must lie in (0, 1/2)"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::invalid("inner config: backtracking factor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InnerStats {
    pub iterations: usize,
    pub grad_norm: f64,
    pub regularized_steps: usize,
    pub steepest_steps: usize,
    /// Stopped because the step fell below round-off of `x`.
    pub stagnated: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InnerSolveFailure {
    #[error("inner solve did not converge in {iterations} iterations (gradient norm {grad_norm:e})")]
    MaxIterations { iterations: usize, grad_norm: f64, best: DVector<f64> },
    #[error("line search failed at iteration {iterations} (gradient norm {grad_norm:e})")]
    LineSearch { iterations: usize, grad_norm: f64, best: DVector<f64> },
    #[error(transparent)]
    Core(#[from] Error),
}

impl InnerSolveFailure {
    pub fn best_iterate(&self) -> Option<&DVector<f64>> {
        match self {
            InnerSolveFailure::MaxIterations { best, .. } | InnerSolveFailure::LineSearch { best, .. } => Some(best),
            InnerSolveFailure::Core(_) => None,
        }
    }
}

/// Cholesky solve of `(A + shift I) d = -g` with the smallest shift from the
/// doubling schedule that makes the shifted matrix clear `pd_floor`.
/// Returns `None` when no admissible shift was found.
fn regularized_newton_step(a: &DMatrix<f64>, g: &DVector<f64>, cfg: &InnerConfig) -> Option<(DVector<f64>, bool)> {
    let n = a.nrows();
    let lmin = lambda_min(a);
    let mut shift = 0.0;
    if !(lmin >= cfg.pd_floor) {
        shift = cfg.levenberg_shift_initial;
        let mut doublings = 0;
        while lmin + shift < cfg.pd_floor {
            if doublings == cfg.max_shift_doublings {
                return None;
            }
            shift *= 2.0;
            doublings += 1;
        }
    }
    let shifted = a + DMatrix::identity(n, n) * shift;
    let chol = shifted.cholesky()?;
    Some((-chol.solve(g), shift > 0.0))
}

/// Minimises `L_c(., y)` from `x0` until `||grad|| <= tol`.
pub fn inner_minimize<P: ProblemOracle + ?Sized>(
    p: &P,
    y: &MultiplierTriple,
    c: f64,
    x0: &DVector<f64>,
    cfg: &InnerConfig,
    tol: f64,
) -> core::result::Result<(DVector<f64>, InnerStats), InnerSolveFailure> {
    cfg.validate()?;
    let mut x = x0.clone();
    let mut stats = InnerStats::default();
    let mut val = aug_lagrangian_value(p, &x, y, c)?;
    let mut grad = aug_lagrangian_grad(p, &x, y, c)?;
    loop {
        stats.grad_norm = grad.norm();
        if stats.grad_norm <= tol {
            return Ok((x, stats));
        }
        if stats.iterations == cfg.max_iter {
            return Err(InnerSolveFailure::MaxIterations { iterations: stats.iterations, grad_norm: stats.grad_norm, best: x });
        }
        let a = newton_matrix_element(p, &x, y, c, &cfg.choices)?;
        let dir = match regularized_newton_step(&a, &grad, cfg) {
            Some((d, shifted)) => {
                if shifted {
                    stats.regularized_steps += 1;
                }
                d
            }
            None => {
                stats.steepest_steps += 1;
                -&grad
            }
        };
        let slope = grad.dot(&dir);
        // Round-off allowance: near the minimiser the predicted decrease
        // drops below the resolution of the objective value.
        let noise = 16.0 * f64::EPSILON * (1.0 + val.abs());
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = &x + &dir * alpha;
            let tv = aug_lagrangian_value(p, &trial, y, c)?;
            if tv <= val + cfg.armijo_sigma * alpha * slope + noise {
                accepted = Some((trial, tv));
                break;
            }
            alpha *= cfg.backtrack;
        }
        stats.iterations += 1;
        let Some((trial, tv)) = accepted else {
            return Err(InnerSolveFailure::LineSearch { iterations: stats.iterations, grad_norm: stats.grad_norm, best: x });
        };
        let step = (&trial - &x).norm();
        x = trial;
        val = tv;
        grad = aug_lagrangian_grad(p, &x, y, c)?;
        if step <= 4.0 * f64::EPSILON * (1.0 + x.norm()) {
            stats.grad_norm = grad.norm();
            stats.stagnated = stats.grad_norm > tol;
            return Ok((x, stats));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyMode {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmConfig {
    pub c0: f64,
    pub kappa: f64,
    pub penalty_mode: PenaltyMode,
    pub residual_decrease_ratio: f64,
    pub c_max: f64,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub inner: InnerConfig,
    /// Radius around the reference primal point; leaving it is flagged in the trace.
    pub trust_radius: Option<f64>,
}

impl Default for AlmConfig {
    fn default() -> Self {
        Self {
            c0: 10.0,
            kappa: 10.0,
            penalty_mode: PenaltyMode::Adaptive,
            residual_decrease_ratio: 0.25,
            c_max: 1e8,
            outer_tol: 1e-8,
            max_outer: 100,
            inner: InnerConfig::default(),
            trust_radius: None,
        }
    }
}

impl AlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0) || !self.c0.is_finite() {
            return Err(Error::invalid("initial penalty must be positive"));
        }
        if !(self.kappa > 1.0) {
            return Err(Error::invalid("penalty growth factor must exceed 1"));
        }
        if !(self.residual_decrease_ratio > 0.0 && self.residual_decrease_ratio < 1.0) {
            return Err(Error::invalid("residual decrease ratio must lie in (0, 1)"));
        }
        if !(self.outer_tol > 0.0) || !(self.c_max >= self.c0) {
            return Err(Error::invalid("outer tolerance must be positive and c_max at least c0"));
        }
        self.inner.validate()
    }
}

/// Next penalty parameter.
pub fn penalty_update(residual_now: f64, residual_prev: f64, c: f64, cfg: &AlmConfig) -> f64 {
    match cfg.penalty_mode {
        PenaltyMode::Fixed => c,
        PenaltyMode::Adaptive => {
            if residual_now > cfg.residual_decrease_ratio * residual_prev {
                (c * cfg.kappa).min(cfg.c_max)
            } else {
                c
            }
        }
    }
}

/// One row of the trace. Row 0 is the starting point; row `k >= 1` holds the
/// inner minimiser `x^k` computed with penalty `c` and the updated multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmIterate {
    pub k: usize,
    pub c: f64,
    pub x: DVector<f64>,
    pub multipliers: MultiplierTriple,
    pub residual: KktResidual,
    pub inner_iterations: usize,
    pub inner_stagnated: bool,
    pub dist_x: Option<f64>,
    pub dist_y: Option<f64>,
    pub outside_trust_ball: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlmTrace {
    pub iterates: Vec<AlmIterate>,
}

impl AlmTrace {
    pub fn last(&self) -> Option<&AlmIterate> {
        self.iterates.last()
    }

    /// `||y^{k+1} - ybar|| / ||y^k - ybar||` for consecutive rows.
    pub fn y_ratios(&self) -> Vec<f64> {
        self.iterates
            .windows(2)
            .filter_map(|w| match (w[0].dist_y, w[1].dist_y) {
                (Some(a), Some(b)) if a > 0.0 => Some(b / a),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlmError {
    #[error("invalid configuration or input: {0}")]
    Invalid(#[from] Error),
    #[error("outer loop hit the iteration limit")]
    MaxIterations { trace: AlmTrace },
    #[error("inner solve failed at outer iteration {k}: {failure}")]
    InnerSolve { k: usize, failure: InnerSolveFailure, trace: AlmTrace },
}

impl AlmError {
    pub fn trace(&self) -> Option<&AlmTrace> {
        match self {
            AlmError::Invalid(_) => None,
            AlmError::MaxIterations { trace } | AlmError::InnerSolve { trace, .. } => Some(trace),
        }
    }
}

fn make_row<P: ProblemOracle + ?Sized>(
    p: &P,
    k: usize,
    c: f64,
    x: &DVector<f64>,
    y: &MultiplierTriple,
    inner: Option<InnerStats>,
    reference: Option<&KktPoint>,
    cfg: &AlmConfig,
) -> Result<AlmIterate> {
    let residual = kkt_residual(p, x, y)?;
    let dist_x = reference.map(|r| (x - &r.x).norm());
    let dist_y = reference.map(|r| y.dist(&r.multipliers));
    let outside = matches!((dist_x, cfg.trust_radius), (Some(d), Some(eps)) if d > eps);
    Ok(AlmIterate {
        k,
        c,
        x: x.clone(),
        multipliers: y.clone(),
        residual,
        inner_iterations: inner.map_or(0, |s| s.iterations),
        inner_stagnated: inner.is_some_and(|s| s.stagnated),
        dist_x,
        dist_y,
        outside_trust_ball: outside,
    })
}

/// Runs the method of multipliers from `(x0, y0)`.
pub fn alm_solve<P: ProblemOracle + ?Sized>(
    p: &P,
    y0: &MultiplierTriple,
    cfg: &AlmConfig,
    x0: &DVector<f64>,
    reference: Option<&KktPoint>,
) -> core::result::Result<(KktPoint, AlmTrace), AlmError> {
    cfg.validate()?;
    let d = p.dims();
    y0.check_dims(d)?;
    if x0.len() != d.n {
        return Err(Error::invalid("starting point has the wrong length").into());
    }
    let mut trace = AlmTrace::default();
    let mut c = cfg.c0;
    let mut x = x0.clone();
    let mut y = y0.clone();
    let first = make_row(p, 0, c, &x, &y, None, reference, cfg)?;
    let mut prev_res = first.residual.total();
    trace.iterates.push(first);
    if prev_res <= cfg.outer_tol {
        let residual = trace.iterates[0].residual;
        return Ok((KktPoint { x, multipliers: y, residual }, trace));
    }
    for k in 1..=cfg.max_outer {
        let tol = cfg.inner.grad_tol.max(cfg.inner.grad_tol_rel * prev_res);
        let (xk, stats) = match inner_minimize(p, &y, c, &x, &cfg.inner, tol) {
            Ok(v) => v,
            Err(failure) => return Err(AlmError::InnerSolve { k, failure, trace }),
        };
        let ynew = multiplier_maps(p, &xk, &y, c)?;
        let row = make_row(p, k, c, &xk, &ynew, Some(stats), reference, cfg)?;
        let res = row.residual.total();
        log::debug!("outer {k}: c = {c:e}, residual = {res:e}, inner = {}", stats.iterations);
        trace.iterates.push(row);
        x = xk;
        y = ynew;
        if res <= cfg.outer_tol {
            let residual = trace.iterates[k].residual;
            return Ok((KktPoint { x, multipliers: y, residual }, trace));
        }
        c = penalty_update(res, prev_res, c, cfg);
        prev_res = res;
    }
    Err(AlmError::MaxIterations { trace })
}
