//! The TOML run configuration. Every section is optional and falls back to
//! the defaults shown by `cbf` when the key is absent.

use std::f64::consts::PI;
use std::path::Path;

use cbf_core::assimilation::TWIN_WEIGHTS;
use cbf_core::control::{ControlProblem, CostConfig, CostWeights, OptimizerConfig};
use cbf_core::forward::{solve_forward_observed, ControlOperator, FieldSeries, Model, TimeGrid};
use cbf_core::operators::{CbfParams, Exponent};
use cbf_core::spectral::{random_divfree_field, DealiasRule, GridSpec, PhysicalVecField, SpectralVecField};
use cbf_core::verify::VerifyConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Base seed; added to every field seed and used by the optimizer,
    /// the verify suite and the measurement noise.
    pub seed: u64,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub time: TimeConfig,
    pub initial: FieldSpec,
    pub forcing: FieldSpec,
    pub control: ControlSpec,
    pub cost: CostSection,
    pub optimizer: OptimizerConfig,
    pub assimilation: AssimSection,
    pub verify: VerifyConfig,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid: GridConfig::default(),
            params: ParamsConfig::default(),
            time: TimeConfig::default(),
            initial: FieldSpec::Random {
                seed: 1,
                decay: 1.5,
                norm: 1.0,
            },
            forcing: FieldSpec::Zero,
            control: ControlSpec::LowModes { kmax: 3 },
            cost: CostSection::default(),
            optimizer: OptimizerConfig::default(),
            assimilation: AssimSection::default(),
            verify: VerifyConfig::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
    pub dealias: DealiasRule,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 32,
            length: 2.0 * PI,
            dealias: DealiasRule::OneHalf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: u32,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mu: 0.1,
            alpha: 0.1,
            beta: 0.5,
            r: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub dt: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { horizon: 0.25, dt: 1e-2 }
    }
}

/// A divergence-free field built from a short description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    /// Random field with spectrum `|k|^-decay`, rescaled to `‖u‖_H = norm`.
    Random { seed: u64, decay: f64, norm: f64 },
    /// `u = (amplitude·sin(m·y), 0)`.
    Shear { amplitude: f64, wavenumber: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSpec {
    Identity,
    LowModes { kmax: i64 },
    /// Indicator of the strip `a <= x < b`.
    Strip { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub weights: CostWeights,
    /// Constant desired state `u_d`.
    pub target: FieldSpec,
    /// When set, `u_d` and `u_f` are instead the trajectory driven by the
    /// constant control `D` applied to this field.
    pub reference_control: Option<FieldSpec>,
    pub terminal_target: FieldSpec,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            weights: CostWeights::default(),
            target: FieldSpec::Random {
                seed: 2,
                decay: 1.5,
                norm: 1.0,
            },
            reference_control: None,
            terminal_target: FieldSpec::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssimSection {
    pub truth: FieldSpec,
    pub noise_level: f64,
    /// `weights.control` is the regularization weight on the initial state.
    pub weights: CostWeights,
}

impl Default for AssimSection {
    fn default() -> Self {
        Self {
            truth: FieldSpec::Random {
                seed: 3,
                decay: 1.5,
                norm: 1.0,
            },
            noise_level: 0.0,
            weights: TWIN_WEIGHTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub checkpoint_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { checkpoint_stride: 10 }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.params()?;
        self.time_grid()?;
        self.cost.weights.validate().map_err(config_err)?;
        self.assimilation.weights.validate().map_err(config_err)?;
        self.optimizer.validate().map_err(config_err)?;
        if !(self.assimilation.noise_level >= 0.0 && self.assimilation.noise_level.is_finite()) {
            return Err(config_err("assimilation.noise_level must be >= 0"));
        }
        if self.output.checkpoint_stride == 0 {
            return Err(config_err("output.checkpoint_stride must be positive"));
        }
        if self.verify.n < 8 || !self.verify.n.is_multiple_of(2) {
            return Err(config_err("verify.n must be even and >= 8"));
        }
        for spec in [&self.initial, &self.forcing, &self.cost.target, &self.cost.terminal_target, &self.assimilation.truth]
        {
            self.field(spec)?;
        }
        self.control_operator()?;
        Ok(())
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.length, self.grid.dealias).map_err(config_err)
    }

    pub fn params(&self) -> CliResult<CbfParams> {
        let r = Exponent::try_from(self.params.r).map_err(config_err)?;
        CbfParams::new(self.params.mu, self.params.alpha, self.params.beta, r).map_err(config_err)
    }

    pub fn time_grid(&self) -> CliResult<TimeGrid> {
        TimeGrid::new(self.time.horizon, self.time.dt).map_err(config_err)
    }

    pub fn field(&self, spec: &FieldSpec) -> CliResult<SpectralVecField> {
        let g = self.grid()?;
        match *spec {
            FieldSpec::Zero => Ok(SpectralVecField::zeros(g)),
            FieldSpec::Random { seed, decay, norm } => {
                if !(decay >= 0.0 && decay.is_finite() && norm >= 0.0 && norm.is_finite()) {
                    return Err(config_err("random field needs decay >= 0 and norm >= 0"));
                }
                let u = random_divfree_field(g, seed.wrapping_add(self.seed), decay);
                let current = u.norm_h();
                Ok(if current > 0.0 { u.scaled(norm / current) } else { u })
            }
            FieldSpec::Shear { amplitude, wavenumber } => {
                if wavenumber == 0 || wavenumber.abs() > g.cutoff() {
                    return Err(config_err(format!(
                        "shear wavenumber must satisfy 0 < |m| <= {}",
                        g.cutoff()
                    )));
                }
                let m = wavenumber as f64 * 2.0 * PI / g.length();
                Ok(PhysicalVecField::from_fn(g, |_, y| [amplitude * (m * y).sin(), 0.0]).to_spectral())
            }
        }
    }

    pub fn control_operator(&self) -> CliResult<ControlOperator> {
        let g = self.grid()?;
        match self.control {
            ControlSpec::Identity => Ok(ControlOperator::identity(g)),
            ControlSpec::LowModes { kmax } => {
                if kmax < 1 {
                    return Err(config_err("control.kmax must be >= 1"));
                }
                Ok(ControlOperator::low_modes(g, kmax))
            }
            ControlSpec::Strip { a, b } => {
                ControlOperator::region_from_fn(g, |x, _| if x >= a && x < b { 1.0 } else { 0.0 }).map_err(config_err)
            }
        }
    }

    pub fn model(&self) -> CliResult<Model> {
        let forcing = match &self.forcing {
            FieldSpec::Zero => FieldSeries::Zero,
            spec => FieldSeries::Constant(self.field(spec)?),
        };
        Ok(Model::new(self.params()?, self.control_operator()?, forcing))
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            seed: self.seed,
            ..self.optimizer
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            seed: self.seed,
            ..self.verify
        }
    }

    /// The distributed-control problem described by `[cost]`.
    pub fn control_problem(&self) -> CliResult<ControlProblem> {
        let model = self.model()?;
        let time = self.time_grid()?;
        let u0 = self.field(&self.initial)?;
        let (target, terminal) = match &self.cost.reference_control {
            Some(spec) => {
                let shape = model.control.apply(&self.field(spec)?)?;
                let controls = vec![shape; time.steps() + 1];
                let mut states = Vec::with_capacity(time.steps() + 1);
                solve_forward_observed(&u0, &model, &controls, time, self.output.checkpoint_stride, |_, u| {
                    states.push(u.clone())
                })?;
                let last = states.last().cloned();
                (FieldSeries::Series(states), last)
            }
            None => {
                let target = match &self.cost.target {
                    FieldSpec::Zero => FieldSeries::Zero,
                    spec => FieldSeries::Constant(self.field(spec)?),
                };
                let terminal = match &self.cost.terminal_target {
                    FieldSpec::Zero => None,
                    spec => Some(self.field(spec)?),
                };
                (target, terminal)
            }
        };
        let cost = CostConfig::new(target, terminal, self.cost.weights)?;
        let mut problem = ControlProblem::distributed(model, cost, time, u0);
        problem.checkpoint_stride = self.output.checkpoint_stride;
        Ok(problem)
    }
}
