use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::field::SpectralVecField;
use super::grid::GridSpec;

/// Deterministic random solenoidal field with modal amplitude `∝ |m|^{-decay}`.
///
/// Modes are drawn shell by shell (`max(|m_x|, |m_y|) = 1, 2, …`), so the
/// field generated on a finer grid extends the coarse one with the same seed.
/// Only modes inside the dealiasing band are populated.
pub fn random_divfree_field(grid: GridSpec, seed: u64, decay_exponent: f64) -> SpectralVecField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_divfree_field_from_rng(grid, &mut rng, decay_exponent)
}

pub fn random_divfree_field_from_rng<R: Rng + ?Sized>(
    grid: GridSpec,
    rng: &mut R,
    decay_exponent: f64,
) -> SpectralVecField {
    assert!(decay_exponent >= 0.0, "decay exponent must be nonnegative");
    let mut field = SpectralVecField::zeros(grid);
    for shell in 1..=grid.cutoff() {
        for (mx, my) in half_plane_shell(shell) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let xi = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            let m2 = (mx * mx + my * my) as f64;
            let m = m2.sqrt();
            let amp = m.powf(-decay_exponent);
            // û = (i m_y, -i m_x)/|m| · a ξ is orthogonal to k.
            let i = Complex64::new(0.0, 1.0);
            let u1 = i * (my as f64 / m) * amp * xi;
            let u2 = -i * (mx as f64 / m) * amp * xi;
            set_pair(&mut field, mx, my, [u1, u2]);
        }
    }
    field
}

/// Unit-`H`-norm projected white noise inside the dealiasing band.
pub fn unit_noise_field<R: Rng + ?Sized>(grid: GridSpec, rng: &mut R) -> SpectralVecField {
    let mut field = SpectralVecField::zeros(grid);
    for shell in 1..=grid.cutoff() {
        for (mx, my) in half_plane_shell(shell) {
            let mut pair = [Complex64::default(); 2];
            for p in pair.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *p = Complex64::new(re, im);
            }
            set_pair(&mut field, mx, my, pair);
        }
    }
    field.project_in_place();
    let norm = field.norm_h();
    if norm > 0.0 {
        field.scale(1.0 / norm);
    }
    field
}

fn set_pair(field: &mut SpectralVecField, mx: i64, my: i64, value: [Complex64; 2]) {
    let g = *field.grid();
    let idx = g.flat(g.index_of(my), g.index_of(mx));
    let mirror = g.mirror(idx);
    for (c, v) in value.iter().enumerate() {
        field.component_mut(c)[idx] = *v;
        field.component_mut(c)[mirror] = v.conj();
    }
}

/// Canonical representatives of `±m` pairs on the square shell of radius `s`.
fn half_plane_shell(s: i64) -> impl Iterator<Item = (i64, i64)> {
    (0..=s).flat_map(move |my| {
        (-s..=s).filter_map(move |mx| {
            let on_shell = mx.abs().max(my) == s;
            let upper = my > 0 || mx > 0;
            (on_shell && upper).then_some((mx, my))
        })
    })
}
