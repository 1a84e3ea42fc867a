use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{axpy_vec, ControlProblem, Evaluation};
use crate::error::{CbfError, Result};
use crate::spectral::SpectralVecField;

/// Descent direction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    GradientDescent,
    /// Nonlinear conjugate gradients, Polak-Ribière with restart at zero.
    NonlinearCg,
    /// Limited-memory BFGS with `memory` correction pairs.
    Lbfgs { memory: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Backtracking factor.
    pub rho: f64,
    pub max_backtracks: usize,
    /// Stop once `‖∇J‖ ≤ grad_tol·‖∇J(U_0)‖`.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// First trial step.
    pub initial_step: f64,
    /// Seed for random starting points.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Lbfgs { memory: 8 },
            c1: 1e-4,
            rho: 0.5,
            max_backtracks: 40,
            grad_tol: 1e-6,
            max_iters: 100,
            initial_step: 1.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c1 > 0.0
            && self.c1 < 1.0
            && self.rho > 0.0
            && self.rho < 1.0
            && self.grad_tol >= 0.0
            && self.initial_step > 0.0
            && self.initial_step.is_finite()
            && !matches!(self.method, Method::Lbfgs { memory: 0 });
        if ok {
            Ok(())
        } else {
            Err(CbfError::InvalidParameter(format!("invalid optimizer settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

/// Per-iteration history of a descent run. Entry `k` describes iterate
/// `U_k`; `steps[0]` is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimReport {
    pub costs: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub steps: Vec<f64>,
    /// `w_control·∫‖U + D*p/(2w_control)‖²` at each iterate.
    pub pontryagin_residual: Vec<f64>,
    pub wall_clock: f64,
    pub termination: Termination,
    pub iterations: usize,
    #[serde(skip)]
    pub optimum: Vec<SpectralVecField>,
}

impl OptimReport {
    pub fn final_cost(&self) -> f64 {
        *self.costs.last().expect("at least the initial iterate")
    }

    pub fn final_grad_norm(&self) -> f64 {
        *self.grad_norms.last().expect("at least the initial iterate")
    }
}

/// Minimizes the problem's cost from `start`.
///
/// A failed line search ends the run with [`Termination::LineSearchFailed`]
/// and keeps the last accepted iterate; trial points that blow up count as
/// rejected steps.
pub fn optimize(problem: &ControlProblem, start: Vec<SpectralVecField>, cfg: &OptimizerConfig) -> Result<OptimReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let residual_of = |gn: f64| gn * gn / (4.0 * problem.cost.weights.control);

    let mut x = start;
    let eval = problem.evaluate(&x, true)?;
    let (mut cost, mut grad) = split(eval);
    let g0 = problem.norm(&grad);
    let mut report = OptimReport {
        costs: vec![cost],
        grad_norms: vec![g0],
        steps: vec![0.0],
        pontryagin_residual: vec![residual_of(g0)],
        wall_clock: 0.0,
        termination: Termination::MaxIterations,
        iterations: 0,
        optimum: Vec::new(),
    };

    let mut history: Vec<(Vec<SpectralVecField>, Vec<SpectralVecField>, f64)> = Vec::new();
    let mut prev: Option<(Vec<SpectralVecField>, Vec<SpectralVecField>, f64)> = None;
    let mut last_step = cfg.initial_step;
    let mut gnorm = g0;

    loop {
        if gnorm == 0.0 || gnorm <= cfg.grad_tol * g0 {
            report.termination = Termination::Converged;
            break;
        }
        if report.iterations >= cfg.max_iters {
            report.termination = Termination::MaxIterations;
            break;
        }

        let (dir, trial) = match cfg.method {
            Method::GradientDescent => {
                let trial = if report.iterations == 0 { cfg.initial_step } else { 2.0 * last_step };
                (negated(&grad), trial)
            }
            Method::NonlinearCg => {
                let mut d = negated(&grad);
                let mut trial = cfg.initial_step;
                if let Some((g_prev, d_prev, step_prev)) = &prev {
                    let diff = axpy_vec(&grad, -1.0, g_prev);
                    let beta = (problem.inner(&grad, &diff) / problem.inner(g_prev, g_prev)).max(0.0);
                    let cand = axpy_vec(&d, beta, d_prev);
                    if problem.inner(&cand, &grad) < 0.0 {
                        d = cand;
                    }
                    let slope_prev = problem.inner(g_prev, d_prev);
                    let slope = problem.inner(&grad, &d);
                    trial = (step_prev * slope_prev / slope).abs().min(1e12);
                }
                (d, trial)
            }
            Method::Lbfgs { .. } => {
                let d = two_loop(problem, &grad, &history);
                let trial = if history.is_empty() { cfg.initial_step } else { 1.0 };
                (d, trial)
            }
        };

        let slope = problem.inner(&grad, &dir);
        let mut step = trial;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let cand = axpy_vec(&x, step, &dir);
            if let Ok(c) = problem.cost(&cand) {
                if c.is_finite() && c <= cost + cfg.c1 * step * slope {
                    accepted = Some(cand);
                    break;
                }
            }
            step *= cfg.rho;
        }
        let Some(x_new) = accepted else {
            report.termination = Termination::LineSearchFailed;
            break;
        };

        let (c_new, g_new) = split(problem.evaluate(&x_new, true)?);
        match cfg.method {
            Method::Lbfgs { memory } => {
                let s = axpy_vec(&x_new, -1.0, &x);
                let y = axpy_vec(&g_new, -1.0, &grad);
                let sy = problem.inner(&s, &y);
                if sy > 1e-12 * problem.norm(&s) * problem.norm(&y) {
                    if history.len() == memory {
                        history.remove(0);
                    }
                    history.push((s, y, 1.0 / sy));
                }
            }
            Method::NonlinearCg => prev = Some((grad.clone(), dir, step)),
            Method::GradientDescent => {}
        }

        x = x_new;
        cost = c_new;
        grad = g_new;
        gnorm = problem.norm(&grad);
        last_step = step;
        report.iterations += 1;
        report.costs.push(cost);
        report.grad_norms.push(gnorm);
        report.steps.push(step);
        report.pontryagin_residual.push(residual_of(gnorm));
    }

    report.optimum = x;
    report.wall_clock = clock.elapsed().as_secs_f64();
    Ok(report)
}

fn split(eval: Evaluation) -> (f64, Vec<SpectralVecField>) {
    (eval.cost.total(), eval.gradient.expect("gradient requested"))
}

fn negated(g: &[SpectralVecField]) -> Vec<SpectralVecField> {
    g.iter().map(|f| f.scaled(-1.0)).collect()
}

/// L-BFGS two-loop recursion with the usual `s·y / y·y` initial scaling.
fn two_loop(
    problem: &ControlProblem,
    grad: &[SpectralVecField],
    history: &[(Vec<SpectralVecField>, Vec<SpectralVecField>, f64)],
) -> Vec<SpectralVecField> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * problem.inner(s, &q);
        q = axpy_vec(&q, -a, y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.last() {
        let gamma = problem.inner(s, y) / problem.inner(y, y);
        q.iter_mut().for_each(|f| f.scale(gamma));
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * problem.inner(y, &q);
        q = axpy_vec(&q, a - b, s);
    }
    negated(&q)
}
