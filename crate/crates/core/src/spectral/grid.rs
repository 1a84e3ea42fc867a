use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};

/// Which band of Fourier modes survives a nonlinear product.
///
/// `TwoThirds` keeps `|m| < n/3` per direction, which removes aliasing from
/// quadratic products; `OneHalf` keeps `|m| < n/4`, which does the same for
/// cubic products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DealiasRule {
    TwoThirds,
    OneHalf,
}

/// Uniform `n x n` grid on the periodic square `[0, L)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
    dealias: DealiasRule,
}

impl GridSpec {
    pub fn new(n: usize, length: f64, dealias: DealiasRule) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(CbfError::InvalidParameter(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(CbfError::InvalidParameter(format!(
                "torus length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length, dealias })
    }

    /// `2π`-periodic grid, the default geometry.
    pub fn periodic(n: usize, dealias: DealiasRule) -> Result<Self> {
        Self::new(n, 2.0 * PI, dealias)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dealias(&self) -> DealiasRule {
        self.dealias
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Smallest eigenvalue of the Stokes operator on mean-zero fields.
    pub fn lambda1(&self) -> f64 {
        let k0 = self.k0();
        k0 * k0
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Largest retained integer wavenumber per direction.
    pub fn cutoff(&self) -> i64 {
        let n = self.n as i64;
        match self.dealias {
            DealiasRule::TwoThirds => (n - 1) / 3,
            DealiasRule::OneHalf => (n - 1) / 4,
        }
    }

    /// Signed integer wavenumber of array index `a` (FFT ordering).
    #[inline]
    pub fn wavenumber(&self, a: usize) -> i64 {
        let n = self.n as i64;
        let a = a as i64;
        if a < n / 2 {
            a
        } else {
            a - n
        }
    }

    /// Array index of the wavenumber `m` (inverse of [`Self::wavenumber`]).
    #[inline]
    pub fn index_of(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of `(row, col)`; rows run along `y`, columns along `x`.
    #[inline]
    pub fn flat(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    /// Flat index of the mode `-k` for the mode stored at `idx`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let (row, col) = (idx / self.n, idx % self.n);
        self.flat((self.n - row) % self.n, (self.n - col) % self.n)
    }

    /// Integer wavevector `(m_x, m_y)` of the mode at flat index `idx`.
    #[inline]
    pub fn integer_mode(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx % self.n), self.wavenumber(idx / self.n))
    }

    /// Physical wavevector `(k_x, k_y)` of the mode at flat index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let (mx, my) = self.integer_mode(idx);
        let k0 = self.k0();
        (k0 * mx as f64, k0 * my as f64)
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let (kx, ky) = self.wavevector(idx);
        kx * kx + ky * ky
    }

    /// Whether the mode survives dealiasing.
    #[inline]
    pub fn in_band(&self, idx: usize) -> bool {
        let (mx, my) = self.integer_mode(idx);
        let k = self.cutoff();
        mx.abs() <= k && my.abs() <= k
    }

    pub fn same_as(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n || self.length != other.length || self.dealias != other.dealias {
            return Err(CbfError::GridMismatch {
                expected_n: self.n,
                expected_len: self.length,
                got_n: other.n,
                got_len: other.length,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_small_grids() {
        assert!(GridSpec::periodic(7, DealiasRule::TwoThirds).is_err());
        assert!(GridSpec::periodic(6, DealiasRule::TwoThirds).is_err());
        assert!(GridSpec::new(16, 0.0, DealiasRule::TwoThirds).is_err());
        assert!(GridSpec::new(16, -1.0, DealiasRule::OneHalf).is_err());
    }

    #[test]
    fn lambda1_is_fundamental_mode_squared() {
        let g = GridSpec::periodic(16, DealiasRule::TwoThirds).unwrap();
        assert_eq!(g.lambda1(), 1.0);
        let g = GridSpec::new(16, PI, DealiasRule::TwoThirds).unwrap();
        assert_eq!(g.lambda1(), (2.0 * PI / PI).powi(2));
    }

    #[test]
    fn cutoffs_leave_products_alias_free() {
        for n in [8usize, 16, 32, 64] {
            let g = GridSpec::periodic(n, DealiasRule::TwoThirds).unwrap();
            assert!(3 * g.cutoff() < n as i64);
            let g = GridSpec::periodic(n, DealiasRule::OneHalf).unwrap();
            assert!(4 * g.cutoff() < n as i64);
        }
        let g = GridSpec::periodic(32, DealiasRule::TwoThirds).unwrap();
        assert_eq!(g.cutoff(), 10);
        let g = GridSpec::periodic(32, DealiasRule::OneHalf).unwrap();
        assert_eq!(g.cutoff(), 7);
    }

    #[test]
    fn mirror_negates_wavevector() {
        let g = GridSpec::periodic(16, DealiasRule::TwoThirds).unwrap();
        for idx in 0..g.len() {
            let (mx, my) = g.integer_mode(idx);
            let (nx, ny) = g.integer_mode(g.mirror(idx));
            // Nyquist modes map onto themselves.
            assert_eq!(g.index_of(-mx), g.index_of(nx));
            assert_eq!(g.index_of(-my), g.index_of(ny));
        }
    }
}
