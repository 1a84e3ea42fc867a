//! Backward adjoint system
//!
//! ```text
//! -∂t p + μAp + (B'(u))*p + αp + βC'(u)p = h,   p(T) = p_T
//! ```
//!
//! realized as the transpose of the discrete tangent step, so that the
//! duality pairing with [`crate::linearized`] holds to round-off.

use crate::error::{CbfError, Result};
use crate::forward::{check_valid, FieldSeries, StateRun, TimeGrid, Trajectory};
use crate::linearized::{solve_linearized_observed, state_dissipation_integral};
use crate::operators::{stokes_a, tangent_adjoint_term};
use crate::spectral::{GridSpec, SpectralVecField, Space};

/// Right-hand side `h` of the adjoint system.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum AdjointRhs {
    #[default]
    Zero,
    /// Sampled at every time node.
    Series(Vec<SpectralVecField>),
    /// `h = 2·track_weight·(u - u_d) + 2·enstrophy_weight·Au`, the gradient of
    /// the running cost along the state.
    Tracking {
        track_weight: f64,
        target: FieldSeries,
        enstrophy_weight: f64,
    },
}

impl AdjointRhs {
    pub fn evaluate(&self, n: usize, u: &SpectralVecField) -> SpectralVecField {
        match self {
            AdjointRhs::Zero => SpectralVecField::zeros(*u.grid()),
            AdjointRhs::Series(s) => s[n].clone(),
            AdjointRhs::Tracking {
                track_weight,
                target,
                enstrophy_weight,
            } => {
                let mut h = u.scaled(2.0 * track_weight);
                if let Some(d) = target.at(n) {
                    h.axpy(-2.0 * track_weight, d);
                }
                if *enstrophy_weight != 0.0 {
                    h.axpy(2.0 * enstrophy_weight, &stokes_a(u));
                }
                h
            }
        }
    }

    fn validate(&self, grid: &GridSpec, steps: usize) -> Result<()> {
        match self {
            AdjointRhs::Zero => Ok(()),
            AdjointRhs::Series(s) => FieldSeries::Series(s.clone()).validate(grid, steps),
            AdjointRhs::Tracking { target, .. } => target.validate(grid, steps),
        }
    }
}

/// Terminal value and right-hand side of an adjoint solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointSpec {
    pub terminal: SpectralVecField,
    pub rhs: AdjointRhs,
}

/// Output of the backward sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointSolution {
    /// Sensitivity of the pairing functional to the initial state, `p(0)`.
    pub initial: SpectralVecField,
    /// Adjoint state at every time node, i.e. the sensitivity to the source
    /// divided by the trapezoid weight.
    pub states: Vec<SpectralVecField>,
    pub time: TimeGrid,
}

impl AdjointSolution {
    pub fn at(&self, n: usize) -> &SpectralVecField {
        &self.states[n]
    }

    /// Checkpointed view of the adjoint states.
    pub fn trajectory(&self, stride: usize) -> Result<Trajectory> {
        let idx = crate::forward::checkpoint_steps(self.time.steps(), stride);
        let states = idx.iter().map(|&n| self.states[n].clone()).collect();
        Trajectory::from_parts(*self.initial.grid(), self.time, stride, states)
    }
}

pub fn solve_adjoint(run: &StateRun, spec: &AdjointSpec) -> Result<AdjointSolution> {
    let grid = *run.model.grid();
    let time = run.time();
    let steps = time.steps();
    let dt = time.dt();
    grid.same_as(spec.terminal.grid())?;
    check_valid(&spec.terminal, "adjoint terminal value")?;
    spec.rhs.validate(&grid, steps)?;
    let stepper = run.stepper()?;
    let params = run.model.params;

    let mut sens = vec![SpectralVecField::zeros(grid); steps + 1];
    let mut lambda = spec.terminal.clone();
    lambda.axpy(time.weight(steps), &spec.rhs.evaluate(steps, run.trajectory.final_state()));

    for j in (0..run.segment_count()).rev() {
        let (start, records) = run.replay_segment(&stepper, j)?;
        for (i, rec) in records.iter().enumerate().rev() {
            let n = start + i;
            let lambda_b = lambda.scaled(0.5 * dt);
            let lambda_stage = tangent_adjoint_term(&rec.stage_kin, &lambda_b, &params);
            sens[n + 1].axpy(1.0, &lambda_b);

            let mut a = lambda_b;
            a.axpy(dt, &lambda_stage);
            let lambda_a = stepper.propagate(&a);
            sens[n].axpy(1.0, &lambda_a);

            let mut w = lambda;
            w.axpy(1.0, &lambda_stage);
            let mut w = stepper.propagate(&w);
            w.axpy(1.0, &tangent_adjoint_term(&rec.kin, &lambda_a, &params));
            w.axpy(time.weight(n), &spec.rhs.evaluate(n, &rec.state));

            let norm = w.norm_h();
            if !w.is_finite() || norm > crate::forward::BLOWUP_THRESHOLD {
                return Err(CbfError::Blowup { step: n, norm });
            }
            lambda = w;
        }
    }
    let states = sens
        .into_iter()
        .enumerate()
        .map(|(n, s)| s.scaled(1.0 / time.weight(n)))
        .collect();
    Ok(AdjointSolution {
        initial: lambda,
        states,
        time,
    })
}

/// `h_n` at every node, evaluated along the replayed state.
fn materialize_rhs(run: &StateRun, rhs: &AdjointRhs) -> Result<Vec<SpectralVecField>> {
    let stepper = run.stepper()?;
    let mut out = Vec::with_capacity(run.time().steps() + 1);
    for j in 0..run.segment_count() {
        let (start, records) = run.replay_segment(&stepper, j)?;
        for (i, rec) in records.iter().enumerate() {
            out.push(rhs.evaluate(start + i, &rec.state));
        }
    }
    out.push(rhs.evaluate(run.time().steps(), run.trajectory.final_state()));
    Ok(out)
}

/// Relative defect of
/// `⟨w_N, p_T⟩ + Σ ω_n⟨w_n, h_n⟩ = ⟨w_0, p(0)⟩ + Σ ω_n⟨g_n, p_n⟩`.
pub fn duality_check(
    run: &StateRun,
    w0: &SpectralVecField,
    g: &[SpectralVecField],
    spec: &AdjointSpec,
) -> Result<f64> {
    let time = run.time();
    let h = materialize_rhs(run, &spec.rhs)?;
    let mut lhs = 0.0;
    let mut scale = 0.0;
    let mut last = None;
    solve_linearized_observed(run, w0, g, |n, w| {
        let wn = time.weight(n);
        lhs += wn * ip(w, &h[n]);
        scale += wn * w.norm_h() * h[n].norm_h();
        if n == time.steps() {
            last = Some(w.clone());
        }
    })?;
    let w_end = last.expect("linearized solve visits the final step");
    lhs += ip(&w_end, &spec.terminal);
    scale += w_end.norm_h() * spec.terminal.norm_h();

    let p = solve_adjoint(run, spec)?;
    let mut rhs = ip(w0, &p.initial);
    scale += w0.norm_h() * p.initial.norm_h();
    for (n, gn) in g.iter().enumerate() {
        let wn = time.weight(n);
        rhs += wn * ip(gn, &p.states[n]);
        scale += wn * gn.norm_h() * p.states[n].norm_h();
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - rhs).abs() / scale)
}

/// Slack of `sup_t‖p‖² <= (‖p_T‖² + (2/(μλ₁))∫‖h‖²)·exp((4/μ)∫‖u‖²_V)`.
pub fn adjoint_bound_margin(run: &StateRun, spec: &AdjointSpec, solution: &AdjointSolution) -> Result<f64> {
    let time = run.time();
    let h = materialize_rhs(run, &spec.rhs)?;
    let h_int = time.integrate(h.iter().map(|f| f.norm_h().powi(2)));
    let mu = run.model.params.mu;
    let lambda1 = run.model.grid().lambda1();
    let u_int = state_dissipation_integral(run)?;
    let bound = (spec.terminal.norm_h().powi(2) + 2.0 / (mu * lambda1) * h_int) * (4.0 / mu * u_int).exp();
    let sup = solution
        .states
        .iter()
        .chain(std::iter::once(&solution.initial))
        .map(|p| p.norm_h().powi(2))
        .fold(0.0, f64::max);
    Ok(bound - sup)
}

fn ip(a: &SpectralVecField, b: &SpectralVecField) -> f64 {
    a.inner(b, Space::H).expect("fields share the run grid")
}
