//! Linearization of the state equation about a stored trajectory:
//!
//! ```text
//! ∂t w + μAw + B'(u)w + αw + βC'(u)w = g,   w(0) = w0
//! ```
//!
//! integrated with the exact derivative of the forward step, so that the
//! tangent solution is the discrete Gateaux derivative of the solver.

use crate::error::{CbfError, Result};
use crate::forward::{
    check_valid, solve_forward_observed, Model, StateRun, TimeGrid, Trajectory, DEFAULT_CHECKPOINT_STRIDE,
};
use crate::operators::tangent_term;
use crate::spectral::SpectralVecField;
use crate::stats::loglog_slope;

fn check_source(run: &StateRun, g: &[SpectralVecField]) -> Result<()> {
    let steps = run.time().steps();
    if !g.is_empty() && g.len() != steps + 1 {
        return Err(CbfError::Misaligned {
            expected: steps + 1,
            got: g.len(),
        });
    }
    for f in g {
        run.model.grid().same_as(f.grid())?;
        check_valid(f, "linearized source")?;
    }
    Ok(())
}

/// Solves the tangent system; `g` holds the source at every time node or is
/// empty for `g = 0`.
pub fn solve_linearized(run: &StateRun, w0: &SpectralVecField, g: &[SpectralVecField]) -> Result<Trajectory> {
    solve_linearized_observed(run, w0, g, |_, _| {})
}

/// [`solve_linearized`] with a callback receiving every `w_n`.
pub fn solve_linearized_observed(
    run: &StateRun,
    w0: &SpectralVecField,
    g: &[SpectralVecField],
    mut observer: impl FnMut(usize, &SpectralVecField),
) -> Result<Trajectory> {
    let grid = *run.model.grid();
    grid.same_as(w0.grid())?;
    check_valid(w0, "linearized initial state")?;
    check_source(run, g)?;
    let stepper = run.stepper()?;
    let time = run.time();
    let dt = time.dt();
    let params = run.model.params;
    let stride = run.trajectory.checkpoint_stride();
    let zero = SpectralVecField::zeros(grid);
    let source = |n: usize| g.get(n).unwrap_or(&zero);

    let mut out = Trajectory::empty(grid, time, stride);
    let mut w = w0.clone();
    for j in 0..run.segment_count() {
        let (start, records) = run.replay_segment(&stepper, j)?;
        for (i, rec) in records.iter().enumerate() {
            let n = start + i;
            observer(n, &w);
            if n % stride == 0 {
                out.push(n, w.clone());
            }
            let mut a = tangent_term(&rec.kin, &w, &params);
            a.axpy(1.0, source(n));

            let mut stage = w.clone();
            stage.axpy(dt, &a);
            let stage = stepper.propagate(&stage);

            let mut b = tangent_term(&rec.stage_kin, &stage, &params);
            b.axpy(1.0, source(n + 1));

            let mut next = w.clone();
            next.axpy(0.5 * dt, &a);
            let mut next = stepper.propagate(&next);
            next.axpy(0.5 * dt, &b);

            let norm = next.norm_h();
            if !next.is_finite() || norm > crate::forward::BLOWUP_THRESHOLD {
                return Err(CbfError::Blowup { step: n + 1, norm });
            }
            w = next;
        }
    }
    observer(time.steps(), &w);
    out.push(time.steps(), w);
    Ok(out)
}

/// Slack of the energy estimate
/// `sup_t‖w‖² <= (‖w0‖² + (2/(μλ₁))∫‖g‖²_H)·exp((4/μ)∫‖u‖²_V)`.
pub fn linearized_energy_margin(run: &StateRun, w0: &SpectralVecField, g: &[SpectralVecField]) -> Result<f64> {
    let time = run.time();
    let mut sup = 0.0f64;
    solve_linearized_observed(run, w0, g, |_, w| sup = sup.max(w.norm_h().powi(2)))?;
    let mu = run.model.params.mu;
    let lambda1 = run.model.grid().lambda1();
    let g_int = if g.is_empty() {
        0.0
    } else {
        time.integrate(g.iter().map(|f| f.norm_h().powi(2)))
    };
    let u_int = state_dissipation_integral(run)?;
    let bound = (w0.norm_h().powi(2) + 2.0 / (mu * lambda1) * g_int) * (4.0 / mu * u_int).exp();
    Ok(bound - sup)
}

/// `∫‖u‖²_V dt` along the stored run, by the trapezoid rule.
pub(crate) fn state_dissipation_integral(run: &StateRun) -> Result<f64> {
    let stepper = run.stepper()?;
    let time = run.time();
    let mut acc = 0.0;
    for j in 0..run.segment_count() {
        let (start, records) = run.replay_segment(&stepper, j)?;
        for (i, rec) in records.iter().enumerate() {
            acc += time.weight(start + i) * rec.state.norm_v().powi(2);
        }
    }
    acc += time.weight(time.steps()) * run.trajectory.final_state().norm_v().powi(2);
    Ok(acc)
}

/// Remainders of the first-order expansion of the control-to-state map.
#[derive(Debug, Clone, PartialEq)]
pub struct GateauxReport {
    pub taus: Vec<f64>,
    /// `e(τ) = sup_t‖u_{U+τU'} - u_U - τw‖_H / τ`.
    pub errors: Vec<f64>,
}

impl GateauxReport {
    /// Log-log slope of `e(τ)`; infinite when the remainder vanishes.
    pub fn slope(&self) -> f64 {
        loglog_slope(&self.taus, &self.errors)
    }
}

/// Measures how fast the difference quotient of the state approaches the
/// tangent solution driven by `D U'`.
pub fn gateaux_check(
    u0: &SpectralVecField,
    model: &Model,
    base: &[SpectralVecField],
    direction: &[SpectralVecField],
    time: TimeGrid,
    taus: &[f64],
) -> Result<GateauxReport> {
    if taus.len() < 3 || taus.windows(2).any(|w| w[1] >= w[0]) || taus.iter().any(|&t| t <= 0.0) {
        return Err(CbfError::InvalidParameter(
            "need at least three positive, strictly decreasing step sizes".into(),
        ));
    }
    let steps = time.steps();
    if direction.len() != steps + 1 {
        return Err(CbfError::Misaligned {
            expected: steps + 1,
            got: direction.len(),
        });
    }
    let zeros = vec![SpectralVecField::zeros(*model.grid()); steps + 1];
    let base = if base.is_empty() { &zeros[..] } else { base };

    let mut reference = Vec::with_capacity(steps + 1);
    let (traj, _) = solve_forward_observed(u0, model, base, time, DEFAULT_CHECKPOINT_STRIDE, |_, u| {
        reference.push(u.clone())
    })?;
    let g = direction
        .iter()
        .map(|d| model.control.apply(d))
        .collect::<Result<Vec<_>>>()?;
    let run = StateRun::new(model, base, &traj);
    let zero_w = SpectralVecField::zeros(*model.grid());
    let mut tangent = Vec::with_capacity(steps + 1);
    solve_linearized_observed(&run, &zero_w, &g, |_, w| tangent.push(w.clone()))?;

    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let perturbed: Vec<SpectralVecField> = base
            .iter()
            .zip(direction)
            .map(|(b, d)| {
                let mut c = b.clone();
                c.axpy(tau, d);
                c
            })
            .collect();
        let mut sup = 0.0f64;
        solve_forward_observed(u0, model, &perturbed, time, DEFAULT_CHECKPOINT_STRIDE, |n, u| {
            let mut r = u - &reference[n];
            r.axpy(-tau, &tangent[n]);
            sup = sup.max(r.norm_h());
        })?;
        errors.push(sup / tau);
    }
    Ok(GateauxReport {
        taus: taus.to_vec(),
        errors,
    })
}
