use super::TimeGrid;
use crate::error::{CbfError, Result};
use crate::spectral::{GridSpec, SpectralVecField};

/// Default spacing between stored states.
pub const DEFAULT_CHECKPOINT_STRIDE: usize = 10;

/// States of a forward run stored every `checkpoint_stride` steps, plus the
/// final state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: GridSpec,
    time: TimeGrid,
    stride: usize,
    stored: Vec<(usize, SpectralVecField)>,
}

/// Step indices kept for a run of `steps` steps.
pub fn checkpoint_steps(steps: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=steps).step_by(stride.max(1)).collect();
    if *out.last().unwrap() != steps {
        out.push(steps);
    }
    out
}

impl Trajectory {
    /// Rebuilds a trajectory from the states at [`checkpoint_steps`].
    pub fn from_parts(
        grid: GridSpec,
        time: TimeGrid,
        stride: usize,
        states: Vec<SpectralVecField>,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(CbfError::InvalidParameter("checkpoint stride must be positive".into()));
        }
        let idx = checkpoint_steps(time.steps(), stride);
        if idx.len() != states.len() {
            return Err(CbfError::Misaligned {
                expected: idx.len(),
                got: states.len(),
            });
        }
        for s in &states {
            grid.same_as(s.grid())?;
        }
        Ok(Self {
            grid,
            time,
            stride,
            stored: idx.into_iter().zip(states).collect(),
        })
    }

    pub(crate) fn empty(grid: GridSpec, time: TimeGrid, stride: usize) -> Self {
        Self {
            grid,
            time,
            stride,
            stored: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, n: usize, u: SpectralVecField) {
        self.stored.push((n, u));
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time
    }

    pub fn dt(&self) -> f64 {
        self.time.dt()
    }

    pub fn steps(&self) -> usize {
        self.time.steps()
    }

    pub fn checkpoint_stride(&self) -> usize {
        self.stride
    }

    /// Uniform time nodes `t_0 … t_N`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps()).map(|n| self.time.time(n)).collect()
    }

    /// Stored state at step `n`, if `n` is a checkpoint.
    pub fn state(&self, n: usize) -> Option<&SpectralVecField> {
        self.stored
            .binary_search_by_key(&n, |(k, _)| *k)
            .ok()
            .map(|i| &self.stored[i].1)
    }

    /// Stored `(step, state)` pairs in increasing order.
    pub fn stored(&self) -> &[(usize, SpectralVecField)] {
        &self.stored
    }

    pub fn initial_state(&self) -> &SpectralVecField {
        &self.stored[0].1
    }

    pub fn final_state(&self) -> &SpectralVecField {
        &self.stored.last().expect("trajectory has states").1
    }
}
