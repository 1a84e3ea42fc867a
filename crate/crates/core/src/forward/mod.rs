//! Time integration of the controlled state equation
//!
//! ```text
//! ∂t u + μAu + B(u) + αu + βC(u) = f + DU
//! ```
//!
//! by an integrating-factor Heun scheme: the linear part is integrated
//! exactly mode by mode, the nonlinear and source terms by the explicit
//! trapezoidal predictor-corrector.

mod control;
mod forcing;
mod ledger;
pub(crate) mod stepper;
mod time;
mod trajectory;

pub use control::{ControlKind, ControlOperator};
pub use forcing::{FieldSeries, Forcing};
pub use ledger::{EnergyLedger, LedgerRow};
pub use stepper::BLOWUP_THRESHOLD;
pub use time::TimeGrid;
pub use trajectory::{checkpoint_steps, Trajectory, DEFAULT_CHECKPOINT_STRIDE};

pub(crate) use forcing::check_valid;

use crate::error::{CbfError, Result};
use crate::operators::{CbfParams, Kinematics};
use crate::spectral::{GridSpec, SpectralVecField};
use stepper::Stepper;

/// Coefficients, control operator and body force of a controlled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: CbfParams,
    pub control: ControlOperator,
    pub forcing: Forcing,
}

impl Model {
    pub fn new(params: CbfParams, control: ControlOperator, forcing: Forcing) -> Self {
        Self {
            params,
            control,
            forcing,
        }
    }

    /// Unforced model with `D = I`.
    pub fn unforced(params: CbfParams, grid: GridSpec) -> Self {
        Self::new(params, ControlOperator::identity(grid), Forcing::Zero)
    }

    pub fn grid(&self) -> &GridSpec {
        self.control.grid()
    }
}

/// Solves the state equation from `u0` with controls sampled at every time
/// node (`controls` may be empty for `U = 0`).
pub fn solve_forward(
    u0: &SpectralVecField,
    model: &Model,
    controls: &[SpectralVecField],
    time: TimeGrid,
) -> Result<(Trajectory, EnergyLedger)> {
    solve_forward_observed(u0, model, controls, time, DEFAULT_CHECKPOINT_STRIDE, |_, _| {})
}

/// [`solve_forward`] with an explicit checkpoint stride and a callback that
/// sees every state `u_n`.
pub fn solve_forward_observed(
    u0: &SpectralVecField,
    model: &Model,
    controls: &[SpectralVecField],
    time: TimeGrid,
    checkpoint_stride: usize,
    mut observer: impl FnMut(usize, &SpectralVecField),
) -> Result<(Trajectory, EnergyLedger)> {
    if checkpoint_stride == 0 {
        return Err(CbfError::InvalidParameter("checkpoint stride must be positive".into()));
    }
    let grid = *model.grid();
    grid.same_as(u0.grid())?;
    check_valid(u0, "initial state")?;
    let stepper = Stepper::new(model, controls, time)?;
    let params = model.params;

    let mut traj = Trajectory::empty(grid, time, checkpoint_stride);
    let mut ledger = EnergyLedger::new();
    ledger.k_t = apriori_constant(u0, model, controls, &time)?;

    let mut u = u0.clone();
    let mut src = stepper.source(0)?;
    for n in 0..=time.steps() {
        observer(n, &u);
        let kin = Kinematics::of(&u);
        let p = r_plus_one(&params);
        ledger.record(
            time.time(n),
            u.norm_h().powi(2),
            params.mu * u.norm_v().powi(2),
            params.alpha * u.norm_h().powi(2),
            params.beta * kin.velocity.lp_norm(p).powf(p),
            src.forcing.inner(&u, crate::spectral::Space::H)?,
            src.control.inner(&u, crate::spectral::Space::H)?,
        );
        if n % checkpoint_stride == 0 || n == time.steps() {
            traj.push(n, u.clone());
        }
        if n == time.steps() {
            break;
        }
        let next_src = stepper.source(n + 1)?;
        let (next, _) = stepper.step(n, &u, &kin, &src.total(), &next_src.total())?;
        u = next;
        src = next_src;
    }
    Ok((traj, ledger))
}

/// A forward run together with the data needed to replay it between
/// checkpoints.
#[derive(Debug, Clone, Copy)]
pub struct StateRun<'a> {
    pub model: &'a Model,
    pub controls: &'a [SpectralVecField],
    pub trajectory: &'a Trajectory,
}

impl<'a> StateRun<'a> {
    pub fn new(model: &'a Model, controls: &'a [SpectralVecField], trajectory: &'a Trajectory) -> Self {
        Self {
            model,
            controls,
            trajectory,
        }
    }

    pub fn time(&self) -> TimeGrid {
        *self.trajectory.time_grid()
    }

    pub(crate) fn stepper(&self) -> Result<Stepper<'a>> {
        self.model.grid().same_as(self.trajectory.grid())?;
        Stepper::new(self.model, self.controls, self.time())
    }

    pub(crate) fn segment_count(&self) -> usize {
        self.trajectory.stored().len() - 1
    }

    /// Replays segment `j` (between stored states `j` and `j + 1`) and checks
    /// that it lands on the stored end state.
    pub(crate) fn replay_segment(&self, stepper: &Stepper, j: usize) -> Result<(usize, Vec<stepper::StepRecord>)> {
        let stored = self.trajectory.stored();
        let (start, ref u_start) = stored[j];
        let (end, ref u_end) = stored[j + 1];
        let (records, last) = stepper.replay(u_start, start, end)?;
        if last != *u_end {
            return Err(CbfError::Precondition(format!(
                "a trajectory produced by this model; replay of steps {start}..{end} does not reproduce the stored state"
            )));
        }
        Ok((start, records))
    }
}

fn r_plus_one(params: &CbfParams) -> f64 {
    params.r.value() as f64 + 1.0
}

/// `K_T = ‖u_0‖² + (2/μ)∫‖f‖²_{V'} + (2/μ)‖D‖²_{L(U,V')}∫‖U‖²`.
pub fn apriori_constant(
    u0: &SpectralVecField,
    model: &Model,
    controls: &[SpectralVecField],
    time: &TimeGrid,
) -> Result<f64> {
    let steps = time.steps();
    let f_int = match &model.forcing {
        Forcing::Zero => 0.0,
        Forcing::Constant(f) => time.horizon() * f.norm_dual().powi(2),
        Forcing::Series(s) => {
            if s.len() != steps + 1 {
                return Err(CbfError::Misaligned {
                    expected: steps + 1,
                    got: s.len(),
                });
            }
            time.integrate(s.iter().map(|f| f.norm_dual().powi(2)))
        }
    };
    let u_int = if controls.is_empty() {
        0.0
    } else {
        if controls.len() != steps + 1 {
            return Err(CbfError::Misaligned {
                expected: steps + 1,
                got: controls.len(),
            });
        }
        time.integrate(controls.iter().map(|c| c.norm_h().powi(2)))
    };
    let mu = model.params.mu;
    Ok(u0.norm_h().powi(2) + 2.0 / mu * f_int + 2.0 / mu * model.control.norm_to_dual().powi(2) * u_int)
}

/// Final normalized defect of the energy equality.
///
/// # Panics
///
/// If the ledger does not belong to the trajectory.
pub fn energy_equality_residual(traj: &Trajectory, ledger: &EnergyLedger) -> f64 {
    assert_eq!(ledger.rows.len(), traj.steps() + 1, "ledger and trajectory differ in length");
    ledger.final_residual()
}

/// `K_T - max_t[‖u(t)‖² + μ∫‖u‖²_V + 2α∫‖u‖² + 2β∫‖u‖^{r+1}]`.
pub fn apriori_bound_check(
    traj: &Trajectory,
    ledger: &EnergyLedger,
    model: &Model,
    controls: &[SpectralVecField],
) -> Result<f64> {
    if ledger.rows.len() != traj.steps() + 1 {
        return Err(CbfError::Misaligned {
            expected: traj.steps() + 1,
            got: ledger.rows.len(),
        });
    }
    let k_t = apriori_constant(traj.initial_state(), model, controls, traj.time_grid())?;
    Ok(k_t - ledger.apriori_left_side())
}

/// Advective CFL step `safety·Δx/max|u|`, capped at `max_dt`.
pub fn advective_time_step(u: &SpectralVecField, safety: f64, max_dt: f64) -> f64 {
    let umax = u.to_physical().max_magnitude();
    if umax == 0.0 {
        max_dt
    } else {
        (safety * u.grid().spacing() / umax).min(max_dt)
    }
}

/// Sensitivity of the state to a control perturbation `τU`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub taus: Vec<f64>,
    /// `sup_t ‖u_{U*+τU}(t) - u_{U*}(t)‖_H` for each `τ`.
    pub sup_deviation: Vec<f64>,
    /// `sup_deviation / τ`.
    pub constants: Vec<f64>,
    /// `sqrt((2/μ)‖D‖²∫‖U‖² e^{8K_T/μ²})`, the analytic bound on the constant.
    pub analytic_constant: f64,
}

impl LipschitzReport {
    /// Largest relative change of the measured constant between successive `τ`.
    pub fn constant_drift(&self) -> f64 {
        self.constants
            .windows(2)
            .map(|w| (w[0] - w[1]).abs() / w[0].abs().max(w[1].abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

pub fn control_lipschitz_check(
    u0: &SpectralVecField,
    model: &Model,
    base: &[SpectralVecField],
    direction: &[SpectralVecField],
    taus: &[f64],
    time: TimeGrid,
) -> Result<LipschitzReport> {
    if direction.len() != time.steps() + 1 {
        return Err(CbfError::Misaligned {
            expected: time.steps() + 1,
            got: direction.len(),
        });
    }
    let zeros;
    let base = if base.is_empty() {
        zeros = vec![SpectralVecField::zeros(*model.grid()); time.steps() + 1];
        &zeros[..]
    } else {
        base
    };
    let mut reference = Vec::with_capacity(time.steps() + 1);
    solve_forward_observed(u0, model, base, time, DEFAULT_CHECKPOINT_STRIDE, |_, u| {
        reference.push(u.clone())
    })?;
    let mut sup_deviation = Vec::with_capacity(taus.len());
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
            sup = sup.max(u.distance_h(&reference[n]));
        })?;
        sup_deviation.push(sup);
    }
    let k_t = apriori_constant(u0, model, base, &time)?;
    let mu = model.params.mu;
    let dir_int = time.integrate(direction.iter().map(|d| d.norm_h().powi(2)));
    let analytic_constant =
        (2.0 / mu * model.control.norm_to_dual().powi(2) * dir_int * (8.0 * k_t / (mu * mu)).exp()).sqrt();
    let constants = taus.iter().zip(&sup_deviation).map(|(t, s)| s / t).collect();
    Ok(LipschitzReport {
        taus: taus.to_vec(),
        sup_deviation,
        constants,
        analytic_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Exponent;
    use crate::spectral::{random_divfree_field, DealiasRule, PhysicalVecField};

    fn grid() -> GridSpec {
        GridSpec::periodic(16, DealiasRule::OneHalf).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let params = CbfParams::new(0.1, 0.0, 1.0, Exponent::Three).unwrap();
        let model = Model::unforced(params, grid());
        let time = TimeGrid::new(0.1, 0.01).unwrap();
        let (traj, ledger) = solve_forward(&SpectralVecField::zeros(grid()), &model, &[], time).unwrap();
        assert!(traj.stored().iter().all(|(_, u)| u.is_zero()));
        assert_eq!(energy_equality_residual(&traj, &ledger), 0.0);
        assert_eq!(ledger.k_t, 0.0);
        assert_eq!(apriori_bound_check(&traj, &ledger, &model, &[]).unwrap(), 0.0);
    }

    #[test]
    fn checkpoints_include_endpoints() {
        assert_eq!(checkpoint_steps(25, 10), vec![0, 10, 20, 25]);
        assert_eq!(checkpoint_steps(20, 10), vec![0, 10, 20]);
        let params = CbfParams::new(0.1, 0.0, 1.0, Exponent::Three).unwrap();
        let model = Model::unforced(params, grid());
        let time = TimeGrid::from_steps(0.01, 25).unwrap();
        let u0 = random_divfree_field(grid(), 1, 1.0);
        let (traj, _) = solve_forward(&u0, &model, &[], time).unwrap();
        assert_eq!(traj.stored().len(), 4);
        assert_eq!(traj.initial_state(), &u0);
        assert!(traj.state(25).is_some() && traj.state(5).is_none());
    }

    #[test]
    fn misaligned_controls_are_rejected() {
        let params = CbfParams::new(0.1, 0.0, 1.0, Exponent::Three).unwrap();
        let model = Model::unforced(params, grid());
        let time = TimeGrid::from_steps(0.01, 5).unwrap();
        let u0 = random_divfree_field(grid(), 1, 1.0);
        let controls = vec![SpectralVecField::zeros(grid()); 3];
        assert_eq!(
            solve_forward(&u0, &model, &controls, time).unwrap_err(),
            CbfError::Misaligned { expected: 6, got: 3 }
        );
    }

    #[test]
    fn invalid_initial_state_is_rejected() {
        let u = PhysicalVecField::from_fn(grid(), |x, _| [x.sin(), 0.0]).to_spectral();
        let params = CbfParams::new(0.1, 0.0, 1.0, Exponent::Three).unwrap();
        let model = Model::unforced(params, grid());
        let time = TimeGrid::from_steps(0.01, 5).unwrap();
        assert!(matches!(solve_forward(&u, &model, &[], time), Err(CbfError::InvalidParameter(_))));
    }

    #[test]
    fn huge_steps_report_blowup() {
        let params = CbfParams::new(1e-3, 0.0, 0.0, Exponent::One).unwrap();
        let model = Model::unforced(params, grid());
        let u0 = random_divfree_field(grid(), 4, 0.5).scaled(1e3);
        let time = TimeGrid::from_steps(1.0, 200).unwrap();
        assert!(matches!(solve_forward(&u0, &model, &[], time), Err(CbfError::Blowup { .. })));
    }
}
