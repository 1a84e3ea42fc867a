use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};
use crate::spectral::{GridSpec, PhysicalVecField, SpectralVecField};

/// How the control enters the momentum equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlKind {
    /// `DU = U`.
    Identity,
    /// Per-mode weights in `[0, 1]`, indexed like the spectral arrays.
    SpectralMask(Vec<f64>),
    /// Physical mask in `[0, 1]`; `DU = P(χU)`.
    RegionIndicator(Vec<f64>),
}

/// Bounded linear control operator `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOperator {
    grid: GridSpec,
    kind: ControlKind,
}

impl ControlOperator {
    pub fn identity(grid: GridSpec) -> Self {
        Self {
            grid,
            kind: ControlKind::Identity,
        }
    }

    /// Mask must be symmetric under `k -> -k` and take values in `[0, 1]`.
    pub fn spectral_mask(grid: GridSpec, weights: Vec<f64>) -> Result<Self> {
        check_mask(&grid, &weights)?;
        for idx in 0..grid.len() {
            if weights[idx] != weights[grid.mirror(idx)] {
                return Err(CbfError::InvalidParameter(
                    "spectral mask must be symmetric under k -> -k".into(),
                ));
            }
        }
        Ok(Self {
            grid,
            kind: ControlKind::SpectralMask(weights),
        })
    }

    /// Actuates the modes with `max(|m_x|, |m_y|) <= kmax`.
    pub fn low_modes(grid: GridSpec, kmax: i64) -> Self {
        let weights = (0..grid.len())
            .map(|idx| {
                let (mx, my) = grid.integer_mode(idx);
                if mx.abs().max(my.abs()) <= kmax {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            grid,
            kind: ControlKind::SpectralMask(weights),
        }
    }

    pub fn region_indicator(grid: GridSpec, mask: Vec<f64>) -> Result<Self> {
        check_mask(&grid, &mask)?;
        Ok(Self {
            grid,
            kind: ControlKind::RegionIndicator(mask),
        })
    }

    /// Region mask sampled from `f(x, y)`.
    pub fn region_from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = grid.spacing();
        let n = grid.n();
        let mask = (0..grid.len())
            .map(|idx| f((idx % n) as f64 * h, (idx / n) as f64 * h))
            .collect();
        Self::region_indicator(grid, mask)
    }

    pub fn from_kind(grid: GridSpec, kind: ControlKind) -> Result<Self> {
        match kind {
            ControlKind::Identity => Ok(Self::identity(grid)),
            ControlKind::SpectralMask(w) => Self::spectral_mask(grid, w),
            ControlKind::RegionIndicator(m) => Self::region_indicator(grid, m),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> &ControlKind {
        &self.kind
    }

    pub fn apply(&self, u: &SpectralVecField) -> Result<SpectralVecField> {
        self.grid.same_as(u.grid())?;
        Ok(match &self.kind {
            ControlKind::Identity => u.project(),
            ControlKind::SpectralMask(w) => u.map_modes(|idx| w[idx]).project(),
            ControlKind::RegionIndicator(chi) => {
                let p = u.to_physical();
                let s: [Vec<f64>; 2] = [0, 1].map(|c| {
                    p.component(c).iter().zip(chi).map(|(v, m)| v * m).collect()
                });
                PhysicalVecField::from_parts(self.grid, s).to_spectral().project()
            }
        })
    }

    /// `D*` in the `H` pairing. Every supported `D` is self-adjoint on the
    /// band-limited solenoidal fields.
    pub fn adjoint(&self, p: &SpectralVecField) -> Result<SpectralVecField> {
        self.apply(p)
    }

    /// Operator norm on `H` (an upper bound for region indicators).
    pub fn norm(&self) -> f64 {
        match &self.kind {
            ControlKind::Identity => 1.0,
            ControlKind::SpectralMask(w) => band_max(&self.grid, |idx| w[idx]),
            ControlKind::RegionIndicator(chi) => chi.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Operator norm from `H` into `V'` (an upper bound for region indicators).
    pub fn norm_to_dual(&self) -> f64 {
        let g = self.grid;
        match &self.kind {
            ControlKind::SpectralMask(w) => band_max(&g, |idx| w[idx] / g.k_squared(idx).sqrt()),
            _ => self.norm() / g.lambda1().sqrt(),
        }
    }
}

fn band_max(g: &GridSpec, f: impl Fn(usize) -> f64) -> f64 {
    (1..g.len())
        .filter(|&idx| g.in_band(idx))
        .map(f)
        .fold(0.0, f64::max)
}

fn check_mask(grid: &GridSpec, mask: &[f64]) -> Result<()> {
    if mask.len() != grid.len() {
        return Err(CbfError::Misaligned {
            expected: grid.len(),
            got: mask.len(),
        });
    }
    if mask.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(CbfError::InvalidParameter("mask values must lie in [0, 1]".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_divfree_field, DealiasRule, Space};

    fn grid() -> GridSpec {
        GridSpec::periodic(16, DealiasRule::OneHalf).unwrap()
    }

    #[test]
    fn identity_has_unit_norm_and_is_identity() {
        let d = ControlOperator::identity(grid());
        let u = random_divfree_field(grid(), 1, 1.0);
        assert!(d.apply(&u).unwrap().distance_h(&u) < 1e-14);
        assert_eq!(d.norm(), 1.0);
        assert_eq!(d.norm_to_dual(), 1.0);
    }

    #[test]
    fn masks_are_validated() {
        let g = grid();
        assert!(ControlOperator::region_indicator(g, vec![2.0; g.len()]).is_err());
        assert!(ControlOperator::region_indicator(g, vec![1.0; 3]).is_err());
        let mut w = vec![0.0; g.len()];
        w[g.flat(0, 1)] = 1.0;
        assert!(ControlOperator::spectral_mask(g, w.clone()).is_err());
        w[g.mirror(g.flat(0, 1))] = 1.0;
        let d = ControlOperator::spectral_mask(g, w).unwrap();
        assert_eq!(d.norm(), 1.0);
    }

    #[test]
    fn operators_are_self_adjoint_and_bounded() {
        let g = grid();
        let ops = [
            ControlOperator::low_modes(g, 2),
            ControlOperator::region_from_fn(g, |x, _| if x < std::f64::consts::PI { 1.0 } else { 0.0 }).unwrap(),
        ];
        let u = random_divfree_field(g, 2, 1.0);
        let p = random_divfree_field(g, 3, 1.0);
        for d in &ops {
            let lhs = d.apply(&u).unwrap().inner(&p, Space::H).unwrap();
            let rhs = u.inner(&d.adjoint(&p).unwrap(), Space::H).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * u.norm_h() * p.norm_h());
            let du = d.apply(&u).unwrap();
            assert!(du.norm_h() <= d.norm() * u.norm_h() * (1.0 + 1e-12));
            assert!(du.norm_dual() <= d.norm_to_dual() * u.norm_h() * (1.0 + 1e-12));
            assert!(du.satisfies_invariants(1e-12));
        }
    }
}
