//! Grids, transforms, Leray projection, inner products and norms on the
//! periodic square.

mod fft;
mod field;
mod grid;
mod random;

pub use field::{transform, Norm, PhysicalVecField, Space, SpectralVecField, VecField};
pub use grid::{DealiasRule, GridSpec};
pub use random::{random_divfree_field, random_divfree_field_from_rng, unit_noise_field};
