//! Recovery of an initial state from a measured trajectory, and synthetic
//! twin data for testing it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{optimize, ControlProblem, CostConfig, CostWeights, OptimReport, OptimizerConfig};
use crate::error::{CbfError, Result};
use crate::forward::{solve_forward_observed, FieldSeries, Model, TimeGrid, DEFAULT_CHECKPOINT_STRIDE};
use crate::spectral::{unit_noise_field, SpectralVecField};

/// Weights used for twin experiments: no enstrophy penalty and a small
/// regularization `w_init = 1e-4` on the initial state.
pub const TWIN_WEIGHTS: CostWeights = CostWeights {
    track: 0.5,
    enstrophy: 0.0,
    control: 1e-4,
    terminal: 0.5,
};

/// Noise settings of synthetic measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwinSettings {
    pub noise_level: f64,
    pub seed: u64,
}

/// Measurements at every time node plus the weights of the misfit.
/// `weights.control` is the regularization weight `w_init`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssimConfig {
    pub measurements: Vec<SpectralVecField>,
    pub terminal: SpectralVecField,
    pub noise_level: f64,
    pub weights: CostWeights,
}

impl AssimConfig {
    pub fn new(
        measurements: Vec<SpectralVecField>,
        terminal: SpectralVecField,
        noise_level: f64,
        weights: CostWeights,
    ) -> Result<Self> {
        if !(noise_level >= 0.0 && noise_level.is_finite()) {
            return Err(CbfError::InvalidParameter(format!("noise level must be >= 0, got {noise_level}")));
        }
        weights.validate()?;
        if measurements.is_empty() {
            return Err(CbfError::InvalidParameter("no measurements".into()));
        }
        Ok(Self {
            measurements,
            terminal,
            noise_level,
            weights,
        })
    }

    /// The initial-data problem `min J(U)` with `u(0) = U`.
    pub fn problem(&self, model: &Model, time: TimeGrid) -> Result<ControlProblem> {
        if self.measurements.len() != time.steps() + 1 {
            return Err(CbfError::Misaligned {
                expected: time.steps() + 1,
                got: self.measurements.len(),
            });
        }
        let cost = CostConfig::new(
            FieldSeries::Series(self.measurements.clone()),
            Some(self.terminal.clone()),
            self.weights,
        )?;
        cost.target.validate(model.grid(), time.steps())?;
        Ok(ControlProblem::initial_data(model.clone(), cost, time))
    }
}

/// Runs the model from `truth_u0` without control and perturbs every state by
/// `noise_level·‖u_n‖` times an independent unit random field.
pub fn generate_twin_data(
    truth_u0: &SpectralVecField,
    model: &Model,
    time: TimeGrid,
    twin: TwinSettings,
    weights: CostWeights,
) -> Result<AssimConfig> {
    if !(twin.noise_level >= 0.0 && twin.noise_level.is_finite()) {
        return Err(CbfError::InvalidParameter(format!(
            "noise level must be >= 0, got {}",
            twin.noise_level
        )));
    }
    let grid = *model.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(twin.seed);
    let mut measurements = Vec::with_capacity(time.steps() + 1);
    solve_forward_observed(truth_u0, model, &[], time, DEFAULT_CHECKPOINT_STRIDE, |_, u| {
        let mut m = u.clone();
        if twin.noise_level > 0.0 {
            let noise = unit_noise_field(grid, &mut rng);
            m.axpy(twin.noise_level * u.norm_h(), &noise);
        }
        measurements.push(m);
    })?;
    let terminal = measurements.last().expect("at least one node").clone();
    AssimConfig::new(measurements, terminal, twin.noise_level, weights)
}

/// Minimizes the assimilation cost starting from `start` (zero if `None`).
pub fn assimilate(
    cfg: &AssimConfig,
    model: &Model,
    time: TimeGrid,
    opt: &OptimizerConfig,
    start: Option<SpectralVecField>,
) -> Result<(SpectralVecField, OptimReport)> {
    let problem = cfg.problem(model, time)?;
    let x0 = vec![start.unwrap_or_else(|| SpectralVecField::zeros(*model.grid()))];
    let mut report = optimize(&problem, x0, opt)?;
    let estimate = report.optimum.pop().expect("one initial field");
    report.optimum.push(estimate.clone());
    Ok((estimate, report))
}

/// `‖estimate - truth‖ / ‖truth‖`, or the absolute error when the truth is zero.
pub fn recovery_error(estimate: &SpectralVecField, truth: &SpectralVecField) -> f64 {
    let d = estimate.distance_h(truth);
    let t = truth.norm_h();
    if t > 0.0 {
        d / t
    } else {
        d
    }
}
