use serde::Serialize;

use super::{ip, ControlProblem, Evaluation, ProblemKind};
use crate::error::{CbfError, Result};
use crate::forward::solve_forward_observed;
use crate::operators::{absorption_c, c_double_prime, convection_b, Exponent};
use crate::spectral::SpectralVecField;

/// Pontryagin residual `w_c·∫‖U + D*p/(2w_c)‖²` (for initial data,
/// `w_c‖U + p(0)/(2w_c)‖²`), computed from the adjoint of `eval`.
///
/// At every decision it equals `‖∇J‖²/(4w_c)` in the problem's inner product.
pub fn pontryagin_residual(problem: &ControlProblem, x: &[SpectralVecField], eval: &Evaluation) -> Result<f64> {
    let adjoint = eval
        .adjoint
        .as_ref()
        .ok_or_else(|| CbfError::Precondition("an evaluation with its adjoint solution".into()))?;
    let w = problem.cost.weights.control;
    let half = 0.5 / w;
    match problem.kind {
        ProblemKind::Distributed { .. } => {
            let mut total = 0.0;
            for (n, (u, p)) in x.iter().zip(&adjoint.states).enumerate() {
                let mut v = problem.model.control.adjoint(p)?;
                v.scale(half);
                v.axpy(1.0, u);
                total += problem.time.weight(n) * v.norm_h().powi(2);
            }
            Ok(w * total)
        }
        ProblemKind::InitialData { .. } => {
            let mut v = adjoint.initial.scaled(half);
            v.axpy(1.0, &x[0]);
            Ok(w * v.norm_h().powi(2))
        }
    }
}

/// The second-order form evaluated along one perturbation of an optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrderForm {
    /// `Q(δ)`.
    pub q: f64,
    /// Positive quadratic part plus the magnitude of the nonlinear part.
    pub scale: f64,
    /// `J(U* + δ) - J(U*)`.
    pub delta_cost: f64,
    /// `⟨∇J(U*), δ⟩`.
    pub first_order: f64,
}

impl SecondOrderForm {
    /// `|ΔJ - ⟨∇J, δ⟩ - Q| / scale`; vanishes with the time step.
    pub fn expansion_defect(&self) -> f64 {
        (self.delta_cost - self.first_order - self.q).abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Evaluates `Q` at the optimum `x_star` along `delta` for the cubic model:
///
/// ```text
/// Q = w_t∫‖u‖² + w_e∫‖∇u‖² + w_c∫‖δ‖² + w_T‖u(T)‖²
///     - ∫⟨B(u, u), p⟩ - β∫⟨2(u*·u)u + |u|²(u + u*), p⟩
/// ```
///
/// where `u = z - u*` is the state difference and `p` the adjoint at `x_star`.
pub fn second_order_form(
    problem: &ControlProblem,
    x_star: &[SpectralVecField],
    star: &Evaluation,
    delta: &[SpectralVecField],
) -> Result<SecondOrderForm> {
    let params = problem.model.params;
    if params.r != Exponent::Three {
        return Err(CbfError::Precondition(format!(
            "absorption exponent r=3 for the second-order form, got r={}",
            params.r.value()
        )));
    }
    let adjoint = star
        .adjoint
        .as_ref()
        .ok_or_else(|| CbfError::Precondition("an evaluation with its adjoint solution".into()))?;
    let gradient = star
        .gradient
        .as_ref()
        .ok_or_else(|| CbfError::Precondition("an evaluation with its gradient".into()))?;
    let x_pert = super::axpy_vec(x_star, 1.0, delta);
    let base = states(problem, x_star)?;
    let pert = states(problem, &x_pert)?;
    let weights = problem.cost.weights;
    let time = problem.time;

    let mut quad = weights.control * problem.inner(delta, delta);
    let mut nonlinear = 0.0;
    for (n, ((us, z), p)) in base.iter().zip(&pert).zip(&adjoint.states).enumerate() {
        let w = time.weight(n);
        let u = z - us;
        quad += w * (weights.track * u.norm_h().powi(2) + weights.enstrophy * u.norm_v().powi(2));
        if n == time.steps() {
            quad += weights.terminal * u.norm_h().powi(2);
        }
        let mut cubic = c_double_prime(us, &u, &u, params.r)?;
        cubic.scale(0.5);
        cubic.axpy(1.0, &absorption_c(&u, params.r));
        nonlinear += w * (ip(&convection_b(&u, &u)?, p) + params.beta * ip(&cubic, p));
    }
    let delta_cost = problem.cost(&x_pert)? - star.cost.total();
    Ok(SecondOrderForm {
        q: quad - nonlinear,
        scale: quad + nonlinear.abs(),
        delta_cost,
        first_order: problem.inner(gradient, delta),
    })
}

/// `Q` along several perturbations of a computed optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondOrderReport {
    pub forms: Vec<SecondOrderForm>,
}

impl SecondOrderReport {
    /// Smallest `Q/scale` over the perturbations.
    pub fn min_relative(&self) -> f64 {
        self.forms
            .iter()
            .map(|f| f.q / f.scale.max(f64::MIN_POSITIVE))
            .fold(f64::INFINITY, f64::min)
    }

    /// `Q(δ) ≥ -tol·scale` for every perturbation.
    pub fn locally_optimal(&self, tol: f64) -> bool {
        self.min_relative() >= -tol
    }
}

pub fn second_order_report(
    problem: &ControlProblem,
    x_star: &[SpectralVecField],
    perturbations: &[Vec<SpectralVecField>],
) -> Result<SecondOrderReport> {
    let star = problem.evaluate(x_star, true)?;
    let forms = perturbations
        .iter()
        .map(|d| second_order_form(problem, x_star, &star, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(SecondOrderReport { forms })
}

fn states(problem: &ControlProblem, x: &[SpectralVecField]) -> Result<Vec<SpectralVecField>> {
    let (u0, controls) = problem.forward_inputs(x);
    let mut out = Vec::with_capacity(problem.time.steps() + 1);
    solve_forward_observed(u0, &problem.model, controls, problem.time, problem.checkpoint_stride, |_, u| {
        out.push(u.clone())
    })?;
    Ok(out)
}
