use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::{CbfError, Result};

/// Inner-product spaces available on [`SpectralVecField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// `L²` pairing.
    H,
    /// Gradient pairing `(∇u, ∇v)`, i.e. the `|k|²`-weighted pairing.
    V,
}

/// Norms available on [`SpectralVecField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    H,
    V,
    L4,
    /// `L^{r+1}` norm associated with the absorption exponent `r`.
    Lr1(u32),
}

/// Velocity field stored as Fourier-series coefficients of both components.
///
/// Coefficient `c[i][idx]` multiplies `e^{ik·x}` in component `i`, so that
/// `∫ f dx = L² f̂(0)`. Valid fields are conjugate symmetric, divergence free
/// and mean free; operator outputs additionally vanish outside the
/// dealiasing band of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVecField {
    grid: GridSpec,
    coeffs: [Vec<Complex64>; 2],
}

/// Velocity samples on the uniform `n x n` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVecField {
    grid: GridSpec,
    samples: [Vec<f64>; 2],
}

/// Either representation of a velocity field.
#[derive(Debug, Clone, PartialEq)]
pub enum VecField {
    Spectral(SpectralVecField),
    Physical(PhysicalVecField),
}

impl VecField {
    pub fn grid(&self) -> &GridSpec {
        match self {
            VecField::Spectral(f) => f.grid(),
            VecField::Physical(f) => f.grid(),
        }
    }
}

/// Converts a field into the other representation after checking that it
/// lives on the declared grid.
pub fn transform(field: &VecField, declared: &GridSpec) -> Result<VecField> {
    declared.same_as(field.grid())?;
    Ok(match field {
        VecField::Spectral(f) => VecField::Physical(f.to_physical()),
        VecField::Physical(f) => VecField::Spectral(f.to_spectral()),
    })
}

impl SpectralVecField {
    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.len();
        Self {
            grid,
            coeffs: [vec![Complex64::default(); len], vec![Complex64::default(); len]],
        }
    }

    pub fn from_coeffs(grid: GridSpec, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Result<Self> {
        if c1.len() != grid.len() || c2.len() != grid.len() {
            return Err(CbfError::InvalidParameter(format!(
                "expected {} coefficients per component, got {} and {}",
                grid.len(),
                c1.len(),
                c2.len()
            )));
        }
        if c1.iter().chain(&c2).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(CbfError::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { grid, coeffs: [c1, c2] })
    }

    /// Field with a single real Fourier pair: coefficient `value` at the
    /// integer wavevector `(mx, my)` and its conjugate at `-(mx, my)`.
    pub fn single_mode(grid: GridSpec, mx: i64, my: i64, value: [Complex64; 2]) -> Self {
        let mut f = Self::zeros(grid);
        let idx = grid.flat(grid.index_of(my), grid.index_of(mx));
        let mirror = grid.mirror(idx);
        for (c, v) in value.iter().enumerate() {
            f.coeffs[c][idx] = *v;
            f.coeffs[c][mirror] = v.conj();
        }
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coeffs[c]
    }

    /// Coefficient pair at the integer wavevector `(mx, my)`.
    pub fn mode(&self, mx: i64, my: i64) -> [Complex64; 2] {
        let idx = self.grid.flat(self.grid.index_of(my), self.grid.index_of(mx));
        [self.coeffs[0][idx], self.coeffs[1][idx]]
    }

    pub fn to_physical(&self) -> PhysicalVecField {
        let n = self.grid.n();
        let (a, b) = fft::inverse_pair(n, &self.coeffs[0], &self.coeffs[1]);
        PhysicalVecField {
            grid: self.grid,
            samples: [a, b],
        }
    }

    /// Physical samples of `∂u_i/∂x_j`, indexed `[i][j]`.
    pub fn gradient_samples(&self) -> [[Vec<f64>; 2]; 2] {
        let n = self.grid.n();
        let dx0 = self.derivative_coeffs(0, 0);
        let dy0 = self.derivative_coeffs(0, 1);
        let dx1 = self.derivative_coeffs(1, 0);
        let dy1 = self.derivative_coeffs(1, 1);
        let (u0x, u0y) = fft::inverse_pair(n, &dx0, &dy0);
        let (u1x, u1y) = fft::inverse_pair(n, &dx1, &dy1);
        [[u0x, u0y], [u1x, u1y]]
    }

    /// Coefficients of `∂u_c/∂x_axis`; Nyquist modes are dropped so the result
    /// stays conjugate symmetric.
    fn derivative_coeffs(&self, c: usize, axis: usize) -> Vec<Complex64> {
        let g = &self.grid;
        let half = (g.n() / 2) as i64;
        self.coeffs[c]
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                let (mx, my) = g.integer_mode(idx);
                let m = if axis == 0 { mx } else { my };
                if m == -half {
                    return Complex64::default();
                }
                let k = g.k0() * m as f64;
                Complex64::new(-k * v.im, k * v.re)
            })
            .collect()
    }

    /// Helmholtz–Hodge projection `I - kkᵀ/|k|²`, applied mode by mode;
    /// also removes the mean.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        let g = self.grid;
        for idx in 0..g.len() {
            let (kx, ky) = g.wavevector(idx);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                self.coeffs[0][idx] = Complex64::default();
                self.coeffs[1][idx] = Complex64::default();
                continue;
            }
            let a = self.coeffs[0][idx];
            let b = self.coeffs[1][idx];
            let dot = (a * kx + b * ky) / k2;
            self.coeffs[0][idx] = a - dot * kx;
            self.coeffs[1][idx] = b - dot * ky;
        }
    }

    /// Zeroes every mode outside the dealiasing band.
    pub fn dealias_in_place(&mut self) {
        let g = self.grid;
        for idx in 0..g.len() {
            if !g.in_band(idx) {
                self.coeffs[0][idx] = Complex64::default();
                self.coeffs[1][idx] = Complex64::default();
            }
        }
    }

    /// Leray projection followed by band truncation.
    pub fn project(&self) -> Self {
        let mut out = self.clone();
        out.project_in_place();
        out
    }

    pub fn project_in_place(&mut self) {
        self.leray_project_in_place();
        self.dealias_in_place();
    }

    /// `max_k |k·û(k)|`.
    pub fn divergence_residual(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .map(|idx| {
                let (kx, ky) = g.wavevector(idx);
                (self.coeffs[0][idx] * kx + self.coeffs[1][idx] * ky).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |û(-k) - conj(û(k))|`.
    pub fn symmetry_residual(&self) -> f64 {
        let g = &self.grid;
        let mut worst = 0.0f64;
        for idx in 0..g.len() {
            let m = g.mirror(idx);
            for c in 0..2 {
                worst = worst.max((self.coeffs[c][m] - self.coeffs[c][idx].conj()).norm());
            }
        }
        worst
    }

    pub fn mean_residual(&self) -> f64 {
        self.coeffs[0][0].norm().max(self.coeffs[1][0].norm())
    }

    /// Largest out-of-band coefficient.
    pub fn band_residual(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&idx| !g.in_band(idx))
            .map(|idx| self.coeffs[0][idx].norm().max(self.coeffs[1][idx].norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// True when every field invariant holds to `tol` relative to the
    /// largest coefficient.
    pub fn satisfies_invariants(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        let kmax = self.grid.k0() * self.grid.n() as f64;
        self.is_finite()
            && self.symmetry_residual() <= tol * scale
            && self.divergence_residual() <= tol * scale * kmax
            && self.mean_residual() <= tol * scale
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    fn weighted_dot(&self, other: &Self, weight: impl Fn(usize) -> f64) -> f64 {
        let area = self.grid.length() * self.grid.length();
        let mut acc = 0.0;
        for idx in 0..self.grid.len() {
            let w = weight(idx);
            if w == 0.0 {
                continue;
            }
            let s = self.coeffs[0][idx] * other.coeffs[0][idx].conj()
                + self.coeffs[1][idx] * other.coeffs[1][idx].conj();
            acc += w * s.re;
        }
        area * acc
    }

    /// `(u, v)_H` without the grid check; callers guarantee matching grids.
    pub(crate) fn dot_h(&self, other: &Self) -> f64 {
        self.weighted_dot(other, |_| 1.0)
    }

    pub(crate) fn dot_v(&self, other: &Self) -> f64 {
        let g = self.grid;
        self.weighted_dot(other, |idx| g.k_squared(idx))
    }

    pub fn inner(&self, other: &Self, space: Space) -> Result<f64> {
        self.grid.same_as(&other.grid)?;
        Ok(match space {
            Space::H => self.dot_h(other),
            Space::V => self.dot_v(other),
        })
    }

    pub fn norm_h(&self) -> f64 {
        self.dot_h(self).max(0.0).sqrt()
    }

    pub fn norm_v(&self) -> f64 {
        self.dot_v(self).max(0.0).sqrt()
    }

    /// `V'` norm `sqrt(L² Σ |û|²/|k|²)`.
    pub fn norm_dual(&self) -> f64 {
        let g = self.grid;
        self.weighted_dot(self, |idx| {
            let k2 = g.k_squared(idx);
            if k2 == 0.0 {
                0.0
            } else {
                1.0 / k2
            }
        })
        .max(0.0)
        .sqrt()
    }

    pub fn norm(&self, norm: Norm) -> Result<f64> {
        match norm {
            Norm::H => Ok(self.norm_h()),
            Norm::V => Ok(self.norm_v()),
            Norm::L4 => Ok(self.to_physical().lp_norm(4.0)),
            Norm::Lr1(r) if (1..=3).contains(&r) => Ok(self.to_physical().lp_norm(r as f64 + 1.0)),
            Norm::Lr1(r) => Err(CbfError::UnsupportedExponent(r)),
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        for c in 0..2 {
            for (s, v) in self.coeffs[c].iter_mut().zip(&x.coeffs[c]) {
                *s += v * a;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.coeffs.iter_mut().flatten() {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// Multiplies each mode by a real factor `f(idx)`.
    pub fn map_modes(&self, f: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for idx in 0..self.grid.len() {
            let w = f(idx);
            out.coeffs[0][idx] *= w;
            out.coeffs[1][idx] *= w;
        }
        out
    }

    /// `|û - v̂|` summed in the `H` norm; convenience for tests and reports.
    pub fn distance_h(&self, other: &Self) -> f64 {
        (self - other).norm_h()
    }
}

impl Add for &SpectralVecField {
    type Output = SpectralVecField;
    fn add(self, rhs: &SpectralVecField) -> SpectralVecField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralVecField {
    type Output = SpectralVecField;
    fn sub(self, rhs: &SpectralVecField) -> SpectralVecField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralVecField {
    type Output = SpectralVecField;
    fn mul(self, rhs: f64) -> SpectralVecField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralVecField {
    type Output = SpectralVecField;
    fn neg(self) -> SpectralVecField {
        self.scaled(-1.0)
    }
}

impl PhysicalVecField {
    pub fn new(grid: GridSpec, s1: Vec<f64>, s2: Vec<f64>) -> Result<Self> {
        if s1.len() != grid.len() || s2.len() != grid.len() {
            return Err(CbfError::InvalidParameter(format!(
                "expected {} samples per component, got {} and {}",
                grid.len(),
                s1.len(),
                s2.len()
            )));
        }
        if s1.iter().chain(&s2).any(|v| !v.is_finite()) {
            return Err(CbfError::InvalidParameter("non-finite sample".into()));
        }
        Ok(Self { grid, samples: [s1, s2] })
    }

    /// Samples a function of the grid coordinates `(x, y)`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut s1 = vec![0.0; grid.len()];
        let mut s2 = vec![0.0; grid.len()];
        for row in 0..n {
            for col in 0..n {
                let v = f(col as f64 * h, row as f64 * h);
                s1[row * n + col] = v[0];
                s2[row * n + col] = v[1];
            }
        }
        Self { grid, samples: [s1, s2] }
    }

    pub(crate) fn from_parts(grid: GridSpec, samples: [Vec<f64>; 2]) -> Self {
        Self { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.samples[c]
    }

    pub fn sample(&self, idx: usize) -> [f64; 2] {
        [self.samples[0][idx], self.samples[1][idx]]
    }

    /// Raw Fourier coefficients (no projection).
    pub fn to_spectral(&self) -> SpectralVecField {
        let (a, b) = fft::forward_pair(self.grid.n(), &self.samples[0], &self.samples[1]);
        SpectralVecField {
            grid: self.grid,
            coeffs: [a, b],
        }
    }

    /// Grid quadrature `∫ f dx ≈ h² Σ f`, exact for trigonometric polynomials
    /// of degree below `n`.
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let h = self.grid.spacing();
        let sum: f64 = (0..self.grid.len()).map(|idx| f(self.sample(idx))).sum();
        h * h * sum
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.integrate(|u| (u[0] * u[0] + u[1] * u[1]).sqrt().powf(p))
            .max(0.0)
            .powf(1.0 / p)
    }

    pub fn norm_h(&self) -> f64 {
        self.integrate(|u| u[0] * u[0] + u[1] * u[1]).max(0.0).sqrt()
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                let u = self.sample(idx);
                (u[0] * u[0] + u[1] * u[1]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Applies a pointwise map to every sample.
    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut s1 = vec![0.0; self.grid.len()];
        let mut s2 = vec![0.0; self.grid.len()];
        for idx in 0..self.grid.len() {
            let v = f(self.sample(idx));
            s1[idx] = v[0];
            s2[idx] = v[1];
        }
        Self {
            grid: self.grid,
            samples: [s1, s2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_divfree_field, DealiasRule};
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::periodic(n, DealiasRule::TwoThirds).unwrap()
    }

    #[test]
    fn single_mode_is_cos_x_in_second_component() {
        let g = grid(16);
        // û((1,0)) = (0, 1/2) plus its conjugate gives u = (0, cos x).
        let u = SpectralVecField::single_mode(
            g,
            1,
            0,
            [Complex64::default(), Complex64::new(0.5, 0.0)],
        );
        let p = u.to_physical();
        let h = g.spacing();
        for idx in 0..g.len() {
            let x = (idx % 16) as f64 * h;
            assert!(p.sample(idx)[0].abs() < 1e-15);
            assert!((p.sample(idx)[1] - x.cos()).abs() < 1e-14);
        }
        let back = p.to_spectral();
        assert!((&back - &u).max_abs_coeff() < 1e-16);
    }

    #[test]
    fn zero_field_round_trips_to_zero() {
        let z = SpectralVecField::zeros(grid(16));
        assert!(z.to_physical().to_spectral().is_zero());
        for norm in [Norm::H, Norm::V, Norm::L4, Norm::Lr1(1), Norm::Lr1(3)] {
            assert_eq!(z.norm(norm).unwrap(), 0.0);
        }
    }

    #[test]
    fn sin_y_energy_is_two_pi_squared() {
        let g = grid(16);
        let u = PhysicalVecField::from_fn(g, |_, y| [y.sin(), 0.0]).to_spectral();
        assert!((u.norm_h().powi(2) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((u.to_physical().norm_h().powi(2) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn leray_kills_gradient_part_and_keeps_solenoidal_part() {
        let g = grid(16);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        let grad = SpectralVecField::single_mode(g, 1, 0, [one, zero]);
        assert!(grad.leray_project().is_zero());
        let sol = SpectralVecField::single_mode(g, 1, 0, [zero, one]);
        assert_eq!(sol.leray_project(), sol);
    }

    #[test]
    fn unsupported_lebesgue_exponent_is_rejected() {
        let u = random_divfree_field(grid(16), 1, 1.0);
        assert_eq!(u.norm(Norm::Lr1(4)), Err(CbfError::UnsupportedExponent(4)));
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let a = SpectralVecField::zeros(grid(16));
        let b = SpectralVecField::zeros(grid(32));
        assert!(matches!(a.inner(&b, Space::H), Err(CbfError::GridMismatch { .. })));
        let wrong = VecField::Spectral(a.clone());
        assert!(transform(&wrong, &grid(32)).is_err());
        assert!(transform(&wrong, &grid(16)).is_ok());
    }

    #[test]
    fn orthogonal_modes_have_zero_pairing() {
        let g = grid(16);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        let a = SpectralVecField::single_mode(g, 1, 0, [zero, one]);
        let b = SpectralVecField::single_mode(g, 0, 2, [one, zero]);
        assert_eq!(a.inner(&b, Space::H).unwrap(), 0.0);
        assert_eq!(a.inner(&b, Space::V).unwrap(), 0.0);
    }
}
