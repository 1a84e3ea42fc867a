//! Integrating-factor Heun step and checkpoint replay.

use super::forcing::check_valid;
use super::{Model, TimeGrid};
use crate::error::{CbfError, Result};
use crate::operators::{nonlinear_term, Kinematics};
use crate::spectral::SpectralVecField;

/// Norm above which a run is declared unstable.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

pub(crate) struct Stepper<'a> {
    pub(crate) model: &'a Model,
    pub(crate) controls: &'a [SpectralVecField],
    pub(crate) time: TimeGrid,
    decay: Vec<f64>,
}

/// Forcing and control contributions at one time node.
pub(crate) struct Source {
    pub(crate) forcing: SpectralVecField,
    pub(crate) control: SpectralVecField,
}

impl Source {
    pub(crate) fn total(&self) -> SpectralVecField {
        &self.forcing + &self.control
    }
}

/// One step `u_n -> u_{n+1}` with its Heun stage `ũ`.
pub(crate) struct StepRecord {
    pub(crate) state: SpectralVecField,
    pub(crate) kin: Kinematics,
    pub(crate) stage_kin: Kinematics,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(model: &'a Model, controls: &'a [SpectralVecField], time: TimeGrid) -> Result<Self> {
        let grid = *model.grid();
        model.params.validate()?;
        model.forcing.validate(&grid, time.steps())?;
        if !controls.is_empty() && controls.len() != time.steps() + 1 {
            return Err(CbfError::Misaligned {
                expected: time.steps() + 1,
                got: controls.len(),
            });
        }
        for c in controls {
            grid.same_as(c.grid())?;
            check_valid(c, "control")?;
        }
        let p = model.params;
        let decay = (0..grid.len())
            .map(|idx| {
                if grid.in_band(idx) {
                    (-(p.mu * grid.k_squared(idx) + p.alpha) * time.dt()).exp()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            model,
            controls,
            time,
            decay,
        })
    }

    /// Exact solution operator of `∂t u + (μA + α)u = 0` over one step.
    pub(crate) fn propagate(&self, f: &SpectralVecField) -> SpectralVecField {
        f.map_modes(|idx| self.decay[idx])
    }

    pub(crate) fn source(&self, n: usize) -> Result<Source> {
        let grid = *self.model.grid();
        let forcing = self
            .model
            .forcing
            .at(n)
            .cloned()
            .unwrap_or_else(|| SpectralVecField::zeros(grid));
        let control = match self.controls.get(n) {
            Some(u) => self.model.control.apply(u)?,
            None => SpectralVecField::zeros(grid),
        };
        Ok(Source { forcing, control })
    }

    /// Advances `u_n` given its kinematics and the total sources at both ends.
    pub(crate) fn step(
        &self,
        n: usize,
        u: &SpectralVecField,
        ku: &Kinematics,
        g_n: &SpectralVecField,
        g_next: &SpectralVecField,
    ) -> Result<(SpectralVecField, Kinematics)> {
        let dt = self.time.dt();
        let params = &self.model.params;
        let mut rhs = nonlinear_term(ku, params);
        rhs.axpy(1.0, g_n);

        let mut stage = u.clone();
        stage.axpy(dt, &rhs);
        let stage = self.propagate(&stage);
        let stage_kin = Kinematics::of(&stage);

        let mut rhs_stage = nonlinear_term(&stage_kin, params);
        rhs_stage.axpy(1.0, g_next);

        let mut next = u.clone();
        next.axpy(0.5 * dt, &rhs);
        let mut next = self.propagate(&next);
        next.axpy(0.5 * dt, &rhs_stage);

        let norm = next.norm_h();
        if !next.is_finite() || !norm.is_finite() || norm > BLOWUP_THRESHOLD {
            return Err(CbfError::Blowup { step: n + 1, norm });
        }
        Ok((next, stage_kin))
    }

    /// Recomputes steps `start..end` from the state at `start`.
    pub(crate) fn replay(
        &self,
        start_state: &SpectralVecField,
        start: usize,
        end: usize,
    ) -> Result<(Vec<StepRecord>, SpectralVecField)> {
        let mut records = Vec::with_capacity(end - start);
        let mut u = start_state.clone();
        let mut g = self.source(start)?.total();
        for n in start..end {
            let g_next = self.source(n + 1)?.total();
            let kin = Kinematics::of(&u);
            let (next, stage_kin) = self.step(n, &u, &kin, &g, &g_next)?;
            records.push(StepRecord {
                state: u,
                kin,
                stage_kin,
            });
            u = next;
            g = g_next;
        }
        Ok((records, u))
    }
}
