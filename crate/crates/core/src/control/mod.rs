//! Quadratic tracking cost, adjoint gradients, descent methods and the
//! first- and second-order optimality diagnostics.
//!
//! The cost of a control `U` with state `u` is
//!
//! ```text
//! J = w_track∫‖u - u_d‖² + w_enstrophy∫‖∇u‖² + w_control∫‖U‖² + w_terminal‖u(T) - u_f‖²
//! ```
//!
//! with time integrals taken by the trapezoid rule on the solver nodes. For
//! the initial-data problem the decision variable is `u(0) = U` and the
//! control term becomes `w_control‖U‖²`.

mod multistart;
mod optimizer;
mod optimality;

pub use multistart::{multistart_uniqueness, thread_pool, MultistartEntry, MultistartReport};
pub use optimizer::{optimize, Method, OptimReport, OptimizerConfig, Termination};
pub use optimality::{
    pontryagin_residual, second_order_form, second_order_report, SecondOrderForm, SecondOrderReport,
};

use serde::{Deserialize, Serialize};

use crate::adjoint::{solve_adjoint, AdjointRhs, AdjointSolution, AdjointSpec};
use crate::error::{CbfError, Result};
use crate::forward::{
    solve_forward_observed, FieldSeries, Model, StateRun, TimeGrid, Trajectory, DEFAULT_CHECKPOINT_STRIDE,
};
use crate::spectral::{SpectralVecField, Space};

/// Weights of the four cost terms; the defaults are all `1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub track: f64,
    pub enstrophy: f64,
    pub control: f64,
    pub terminal: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            track: 0.5,
            enstrophy: 0.5,
            control: 0.5,
            terminal: 0.5,
        }
    }
}

impl CostWeights {
    /// All weights finite and nonnegative; the control weight strictly
    /// positive so that the control cost is coercive.
    pub fn validate(&self) -> Result<()> {
        let all = [self.track, self.enstrophy, self.control, self.terminal];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CbfError::InvalidParameter(format!("cost weights must be >= 0, got {self:?}")));
        }
        if self.control <= 0.0 {
            return Err(CbfError::InvalidParameter("control weight must be > 0".into()));
        }
        Ok(())
    }
}

/// Targets and weights of the tracking cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostConfig {
    /// Desired trajectory `u_d`.
    pub target: FieldSeries,
    /// Desired terminal state `u_f`; `None` means zero.
    pub terminal_target: Option<SpectralVecField>,
    pub weights: CostWeights,
}

impl CostConfig {
    pub fn new(target: FieldSeries, terminal_target: Option<SpectralVecField>, weights: CostWeights) -> Result<Self> {
        weights.validate()?;
        Ok(Self {
            target,
            terminal_target,
            weights,
        })
    }

    fn adjoint_rhs(&self) -> AdjointRhs {
        AdjointRhs::Tracking {
            track_weight: self.weights.track,
            target: self.target.clone(),
            enstrophy_weight: self.weights.enstrophy,
        }
    }

    fn terminal_adjoint(&self, u_end: &SpectralVecField) -> SpectralVecField {
        let mut p = u_end.scaled(2.0 * self.weights.terminal);
        if let Some(uf) = &self.terminal_target {
            p.axpy(-2.0 * self.weights.terminal, uf);
        }
        p
    }
}

/// Individual cost terms, already weighted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub tracking: f64,
    pub enstrophy: f64,
    pub control: f64,
    pub terminal: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.tracking + self.enstrophy + self.control + self.terminal
    }
}

/// Accumulates the state-dependent cost terms node by node.
struct StateCost<'a> {
    cfg: &'a CostConfig,
    time: TimeGrid,
    tracking: f64,
    enstrophy: f64,
    terminal: f64,
}

impl<'a> StateCost<'a> {
    fn new(cfg: &'a CostConfig, time: TimeGrid) -> Self {
        Self {
            cfg,
            time,
            tracking: 0.0,
            enstrophy: 0.0,
            terminal: 0.0,
        }
    }

    fn visit(&mut self, n: usize, u: &SpectralVecField) {
        let w = self.time.weight(n);
        let weights = self.cfg.weights;
        if weights.track != 0.0 {
            let d = match self.cfg.target.at(n) {
                Some(t) => u.distance_h(t),
                None => u.norm_h(),
            };
            self.tracking += weights.track * w * d * d;
        }
        if weights.enstrophy != 0.0 {
            self.enstrophy += weights.enstrophy * w * u.norm_v().powi(2);
        }
        if n == self.time.steps() && weights.terminal != 0.0 {
            let d = match &self.cfg.terminal_target {
                Some(t) => u.distance_h(t),
                None => u.norm_h(),
            };
            self.terminal = weights.terminal * d * d;
        }
    }

    fn finish(self, control: f64) -> CostBreakdown {
        CostBreakdown {
            tracking: self.tracking,
            enstrophy: self.enstrophy,
            control,
            terminal: self.terminal,
        }
    }
}

/// Cost of a stored distributed-control run; intermediate states are
/// recomputed from checkpoints.
pub fn evaluate_cost(run: &StateRun, cfg: &CostConfig) -> Result<CostBreakdown> {
    let time = run.time();
    cfg.target.validate(run.model.grid(), time.steps())?;
    let stepper = run.stepper()?;
    let mut acc = StateCost::new(cfg, time);
    for j in 0..run.segment_count() {
        let (start, records) = run.replay_segment(&stepper, j)?;
        for (i, rec) in records.iter().enumerate() {
            acc.visit(start + i, &rec.state);
        }
    }
    acc.visit(time.steps(), run.trajectory.final_state());
    let control = if run.controls.is_empty() {
        0.0
    } else {
        cfg.weights.control * time.integrate(run.controls.iter().map(|u| u.norm_h().powi(2)))
    };
    Ok(acc.finish(control))
}

/// Which quantity is optimized.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    /// Distributed control `U(t)` at every node, from a fixed initial state.
    Distributed { initial_state: SpectralVecField },
    /// Initial state `U = u(0)`, with fixed (possibly empty) controls.
    InitialData { controls: Vec<SpectralVecField> },
}

/// A complete optimal-control or data-assimilation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub model: Model,
    pub cost: CostConfig,
    pub time: TimeGrid,
    pub kind: ProblemKind,
    pub checkpoint_stride: usize,
}

/// Cost, state run and (optionally) adjoint and gradient at one decision.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub cost: CostBreakdown,
    pub trajectory: Trajectory,
    pub adjoint: Option<AdjointSolution>,
    pub gradient: Option<Vec<SpectralVecField>>,
}

impl ControlProblem {
    pub fn distributed(model: Model, cost: CostConfig, time: TimeGrid, initial_state: SpectralVecField) -> Self {
        Self {
            model,
            cost,
            time,
            kind: ProblemKind::Distributed { initial_state },
            checkpoint_stride: DEFAULT_CHECKPOINT_STRIDE,
        }
    }

    pub fn initial_data(model: Model, cost: CostConfig, time: TimeGrid) -> Self {
        Self {
            model,
            cost,
            time,
            kind: ProblemKind::InitialData { controls: Vec::new() },
            checkpoint_stride: DEFAULT_CHECKPOINT_STRIDE,
        }
    }

    /// Number of fields in a decision vector.
    pub fn decision_len(&self) -> usize {
        match self.kind {
            ProblemKind::Distributed { .. } => self.time.steps() + 1,
            ProblemKind::InitialData { .. } => 1,
        }
    }

    pub fn zero_decision(&self) -> Vec<SpectralVecField> {
        vec![SpectralVecField::zeros(*self.model.grid()); self.decision_len()]
    }

    /// Inner product on decisions: trapezoid-weighted in time for
    /// distributed controls, the `H` pairing for initial data.
    pub fn inner(&self, a: &[SpectralVecField], b: &[SpectralVecField]) -> f64 {
        match self.kind {
            ProblemKind::Distributed { .. } => a
                .iter()
                .zip(b)
                .enumerate()
                .map(|(n, (x, y))| self.time.weight(n) * ip(x, y))
                .sum(),
            ProblemKind::InitialData { .. } => ip(&a[0], &b[0]),
        }
    }

    pub fn norm(&self, a: &[SpectralVecField]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    fn check_decision(&self, x: &[SpectralVecField]) -> Result<()> {
        if x.len() != self.decision_len() {
            return Err(CbfError::Misaligned {
                expected: self.decision_len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `(u0, controls)` of the forward run for decision `x`.
    fn forward_inputs<'a>(&'a self, x: &'a [SpectralVecField]) -> (&'a SpectralVecField, &'a [SpectralVecField]) {
        match &self.kind {
            ProblemKind::Distributed { initial_state } => (initial_state, x),
            ProblemKind::InitialData { controls } => (&x[0], controls),
        }
    }

    fn control_cost(&self, x: &[SpectralVecField]) -> f64 {
        self.cost.weights.control * self.inner(x, x)
    }

    /// Cost only (one forward solve).
    pub fn cost(&self, x: &[SpectralVecField]) -> Result<f64> {
        Ok(self.evaluate(x, false)?.cost.total())
    }

    /// Forward solve, and with `gradient` also the adjoint solve and the
    /// gradient in the decision inner product.
    pub fn evaluate(&self, x: &[SpectralVecField], gradient: bool) -> Result<Evaluation> {
        self.check_decision(x)?;
        self.cost.target.validate(self.model.grid(), self.time.steps())?;
        let (u0, controls) = self.forward_inputs(x);
        let mut acc = StateCost::new(&self.cost, self.time);
        let (trajectory, _) =
            solve_forward_observed(u0, &self.model, controls, self.time, self.checkpoint_stride, |n, u| {
                acc.visit(n, u)
            })?;
        let cost = acc.finish(self.control_cost(x));
        if !gradient {
            return Ok(Evaluation {
                cost,
                trajectory,
                adjoint: None,
                gradient: None,
            });
        }
        let run = StateRun::new(&self.model, controls, &trajectory);
        let spec = AdjointSpec {
            terminal: self.cost.terminal_adjoint(trajectory.final_state()),
            rhs: self.cost.adjoint_rhs(),
        };
        let adjoint = solve_adjoint(&run, &spec)?;
        let two_w = 2.0 * self.cost.weights.control;
        let grad = match self.kind {
            ProblemKind::Distributed { .. } => x
                .iter()
                .zip(&adjoint.states)
                .map(|(u, p)| {
                    let mut g = self.model.control.adjoint(p)?;
                    g.axpy(two_w, u);
                    Ok(g)
                })
                .collect::<Result<Vec<_>>>()?,
            ProblemKind::InitialData { .. } => {
                let mut g = adjoint.initial.clone();
                g.axpy(two_w, &x[0]);
                vec![g]
            }
        };
        Ok(Evaluation {
            cost,
            trajectory,
            adjoint: Some(adjoint),
            gradient: Some(grad),
        })
    }

    /// Gradient in the decision inner product.
    pub fn gradient(&self, x: &[SpectralVecField]) -> Result<Vec<SpectralVecField>> {
        Ok(self.evaluate(x, true)?.gradient.expect("gradient requested"))
    }

    /// Central-difference check of the gradient along `direction`:
    /// returns `|⟨∇J, δ⟩ - (J(x+τδ) - J(x-τδ))/(2τ)| / |⟨∇J, δ⟩|`.
    pub fn gradient_fd_error(&self, x: &[SpectralVecField], direction: &[SpectralVecField], tau: f64) -> Result<f64> {
        let g = self.gradient(x)?;
        let exact = self.inner(&g, direction);
        let shifted = |s: f64| -> Vec<SpectralVecField> {
            x.iter()
                .zip(direction)
                .map(|(a, d)| {
                    let mut v = a.clone();
                    v.axpy(s, d);
                    v
                })
                .collect()
        };
        let fd = (self.cost(&shifted(tau))? - self.cost(&shifted(-tau))?) / (2.0 * tau);
        Ok((exact - fd).abs() / exact.abs().max(f64::MIN_POSITIVE))
    }
}

/// Gradient of a distributed-control problem: `2w_control·U + D*p`.
pub fn gradient_distributed(problem: &ControlProblem, controls: &[SpectralVecField]) -> Result<Vec<SpectralVecField>> {
    if !matches!(problem.kind, ProblemKind::Distributed { .. }) {
        return Err(CbfError::Precondition("a distributed-control problem".into()));
    }
    problem.gradient(controls)
}

pub(crate) fn ip(a: &SpectralVecField, b: &SpectralVecField) -> f64 {
    a.inner(b, Space::H).expect("fields share the problem grid")
}

/// `x + s·d` fieldwise.
pub(crate) fn axpy_vec(x: &[SpectralVecField], s: f64, d: &[SpectralVecField]) -> Vec<SpectralVecField> {
    x.iter()
        .zip(d)
        .map(|(a, b)| {
            let mut v = a.clone();
            v.axpy(s, b);
            v
        })
        .collect()
}
