use crate::error::{CbfError, Result};
use crate::spectral::{GridSpec, SpectralVecField};

/// Field-valued function of time: zero, constant, or sampled at every time
/// node. Used for body forces and for tracking targets.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FieldSeries {
    #[default]
    Zero,
    Constant(SpectralVecField),
    Series(Vec<SpectralVecField>),
}

pub type Forcing = FieldSeries;

impl FieldSeries {
    pub fn at(&self, n: usize) -> Option<&SpectralVecField> {
        match self {
            FieldSeries::Zero => None,
            FieldSeries::Constant(f) => Some(f),
            FieldSeries::Series(s) => s.get(n),
        }
    }

    /// Checks grid, length and field invariants against a run of `steps` steps.
    pub fn validate(&self, grid: &GridSpec, steps: usize) -> Result<()> {
        let fields: &[SpectralVecField] = match self {
            FieldSeries::Zero => &[],
            FieldSeries::Constant(f) => std::slice::from_ref(f),
            FieldSeries::Series(s) => {
                if s.len() != steps + 1 {
                    return Err(CbfError::Misaligned {
                        expected: steps + 1,
                        got: s.len(),
                    });
                }
                s
            }
        };
        for f in fields {
            grid.same_as(f.grid())?;
            check_valid(f, "time-series field")?;
        }
        Ok(())
    }
}

/// Fields fed to the solvers must be solenoidal, mean free and band limited.
pub(crate) fn check_valid(f: &SpectralVecField, what: &str) -> Result<()> {
    let tol = 1e-10;
    if !f.satisfies_invariants(tol) || f.band_residual() > tol * f.max_abs_coeff() {
        return Err(CbfError::InvalidParameter(format!(
            "{what} must be a finite, divergence-free, mean-free, band-limited field"
        )));
    }
    Ok(())
}
