use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};

/// Uniform time grid `t_n = n·dt`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    /// Requires `horizon/dt` to be an integer up to rounding.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CbfError::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(CbfError::InvalidParameter(format!("horizon must be > 0, got {horizon}")));
        }
        let ratio = horizon / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(CbfError::InvalidParameter(format!(
                "horizon {horizon} is not an integer multiple of dt {dt}"
            )));
        }
        Ok(Self {
            dt,
            steps: steps as usize,
        })
    }

    pub fn from_steps(dt: f64, steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || steps == 0 {
            return Err(CbfError::InvalidParameter(format!(
                "need dt > 0 and at least one step, got dt={dt}, steps={steps}"
            )));
        }
        Ok(Self { dt, steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.dt * n as f64
    }

    /// Composite trapezoid weight of node `n`.
    pub fn weight(&self, n: usize) -> f64 {
        if n == 0 || n == self.steps {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    /// Trapezoid rule applied to nodal values.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values.into_iter().enumerate().map(|(n, v)| self.weight(n) * v).sum()
    }

    /// Same grid with half the step.
    pub fn refined(&self) -> Self {
        Self {
            dt: 0.5 * self.dt,
            steps: 2 * self.steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_integer_ratio() {
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert_eq!(TimeGrid::new(0.5, 1e-3).unwrap().steps(), 500);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_functions() {
        let t = TimeGrid::new(2.0, 0.25).unwrap();
        let v: Vec<f64> = (0..=t.steps()).map(|n| 3.0 * t.time(n) + 1.0).collect();
        assert!((t.integrate(v) - 8.0).abs() < 1e-14);
    }
}
