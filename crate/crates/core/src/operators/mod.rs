//! Projected operators of the Brinkman–Forchheimer system.
//!
//! * `A = -PΔ` (Stokes), diagonal with eigenvalues `|k|²`;
//! * `B(u, v) = P((u·∇)v)` (convection), computed pseudo-spectrally;
//! * `C(u) = P(|u|^{r-1}u)` (absorption) and its Gateaux derivatives.
//!
//! Every nonlinear product is formed on the grid and truncated to the
//! dealiasing band, so the algebraic identities (antisymmetry of `b`, the
//! duality between `B'(u)` and its adjoint, the cubic Taylor expansion) hold
//! to round-off.

mod monotone;
pub mod pointwise;

use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};
use crate::spectral::{GridSpec, PhysicalVecField, SpectralVecField};

pub use monotone::{absorption_lp_bound, monotonicity_check, MonotonicityMode};

/// Absorption exponent `r`; only the cases 1, 2 and 3 are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Exponent {
    One,
    Two,
    Three,
}

impl Exponent {
    pub fn value(self) -> u32 {
        match self {
            Exponent::One => 1,
            Exponent::Two => 2,
            Exponent::Three => 3,
        }
    }
}

impl TryFrom<u32> for Exponent {
    type Error = CbfError;

    fn try_from(r: u32) -> Result<Self> {
        match r {
            1 => Ok(Exponent::One),
            2 => Ok(Exponent::Two),
            3 => Ok(Exponent::Three),
            other => Err(CbfError::UnsupportedExponent(other)),
        }
    }
}

impl From<Exponent> for u32 {
    fn from(r: Exponent) -> u32 {
        r.value()
    }
}

/// Coefficients of the equation: Brinkman `μ`, Darcy `α`, Forchheimer `β`
/// and the absorption exponent `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbfParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: Exponent,
}

impl CbfParams {
    pub fn new(mu: f64, alpha: f64, beta: f64, r: Exponent) -> Result<Self> {
        let p = Self { mu, alpha, beta, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(CbfError::InvalidParameter(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(CbfError::InvalidParameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(CbfError::InvalidParameter(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// `r = 3` and `2βμ >= 1`: the full operator is globally monotone.
    pub fn critical_monotone(&self) -> bool {
        self.r == Exponent::Three && 2.0 * self.beta * self.mu >= 1.0
    }
}

/// Physical samples of a field and of its gradient, reused across the
/// several products evaluated at the same state.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub(crate) velocity: PhysicalVecField,
    /// `grad[i][j] = ∂u_i/∂x_j`.
    pub(crate) grad: [[Vec<f64>; 2]; 2],
    /// Threshold below which `u/|u|` is treated as zero.
    pub(crate) guard: f64,
}

impl Kinematics {
    pub fn of(u: &SpectralVecField) -> Self {
        let velocity = u.to_physical();
        let guard = 1e-12 * velocity.max_magnitude();
        Self {
            velocity,
            grad: u.gradient_samples(),
            guard,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.velocity.grid()
    }

    #[inline]
    fn u(&self, idx: usize) -> [f64; 2] {
        self.velocity.sample(idx)
    }

    /// `(a·∇)self` at sample `idx`.
    #[inline]
    fn advected_by(&self, a: [f64; 2], idx: usize) -> [f64; 2] {
        [
            a[0] * self.grad[0][0][idx] + a[1] * self.grad[0][1][idx],
            a[0] * self.grad[1][0][idx] + a[1] * self.grad[1][1][idx],
        ]
    }

    /// `(∇self)ᵀ p` at sample `idx`.
    #[inline]
    fn grad_transpose_times(&self, p: [f64; 2], idx: usize) -> [f64; 2] {
        [
            self.grad[0][0][idx] * p[0] + self.grad[1][0][idx] * p[1],
            self.grad[0][1][idx] * p[0] + self.grad[1][1][idx] * p[1],
        ]
    }
}

/// Builds samples pointwise, transforms, projects and truncates.
fn project_pointwise(grid: GridSpec, mut f: impl FnMut(usize) -> [f64; 2]) -> SpectralVecField {
    let mut s1 = vec![0.0; grid.len()];
    let mut s2 = vec![0.0; grid.len()];
    for idx in 0..grid.len() {
        let v = f(idx);
        s1[idx] = v[0];
        s2[idx] = v[1];
    }
    PhysicalVecField::from_parts(grid, [s1, s2]).to_spectral().project()
}

fn same_grid(a: &SpectralVecField, b: &SpectralVecField) -> Result<()> {
    a.grid().same_as(b.grid())
}

/// Stokes operator: multiplies each mode by `|k|²`.
pub fn stokes_a(u: &SpectralVecField) -> SpectralVecField {
    let g = *u.grid();
    u.map_modes(|idx| g.k_squared(idx))
}

/// `B(u, v) = P((u·∇)v)`.
pub fn convection_b(u: &SpectralVecField, v: &SpectralVecField) -> Result<SpectralVecField> {
    same_grid(u, v)?;
    let ku = u.to_physical();
    let kv = Kinematics::of(v);
    Ok(project_pointwise(*u.grid(), |idx| kv.advected_by(ku.sample(idx), idx)))
}

/// `b(u, v, w) = ⟨B(u, v), w⟩`.
pub fn trilinear_b(u: &SpectralVecField, v: &SpectralVecField, w: &SpectralVecField) -> Result<f64> {
    same_grid(u, w)?;
    Ok(convection_b(u, v)?.dot_h(w))
}

/// `C(u) = P(|u|^{r-1}u)`.
pub fn absorption_c(u: &SpectralVecField, r: Exponent) -> SpectralVecField {
    let pu = u.to_physical();
    project_pointwise(*u.grid(), |idx| pointwise::absorption(pu.sample(idx), r))
}

/// Gateaux derivative `C'(u)v`.
pub fn c_prime(u: &SpectralVecField, v: &SpectralVecField, r: Exponent) -> Result<SpectralVecField> {
    same_grid(u, v)?;
    let pu = u.to_physical();
    let pv = v.to_physical();
    let guard = 1e-12 * pu.max_magnitude();
    Ok(project_pointwise(*u.grid(), |idx| {
        pointwise::absorption_prime(pu.sample(idx), pv.sample(idx), r, guard)
    }))
}

/// Second Gateaux derivative `C''(u)(v ⊗ w)`, defined for `r = 3` only.
pub fn c_double_prime(
    u: &SpectralVecField,
    v: &SpectralVecField,
    w: &SpectralVecField,
    r: Exponent,
) -> Result<SpectralVecField> {
    if r != Exponent::Three {
        return Err(CbfError::Precondition(format!(
            "absorption exponent r=3 for the second derivative, got r={}",
            r.value()
        )));
    }
    same_grid(u, v)?;
    same_grid(u, w)?;
    let pu = u.to_physical();
    let pv = v.to_physical();
    let pw = w.to_physical();
    Ok(project_pointwise(*u.grid(), |idx| {
        pointwise::absorption_second(pu.sample(idx), pv.sample(idx), pw.sample(idx))
    }))
}

/// `B'(u)w = B(u, w) + B(w, u)`.
pub fn b_prime(u: &SpectralVecField, w: &SpectralVecField) -> Result<SpectralVecField> {
    same_grid(u, w)?;
    let ku = Kinematics::of(u);
    let kw = Kinematics::of(w);
    Ok(project_pointwise(*u.grid(), |idx| {
        let a = kw.advected_by(ku.u(idx), idx);
        let b = ku.advected_by(kw.u(idx), idx);
        [a[0] + b[0], a[1] + b[1]]
    }))
}

/// `(B'(u))* p = P(-(u·∇)p + (∇u)ᵀp)` for divergence-free `u`.
pub fn b_prime_adjoint(u: &SpectralVecField, p: &SpectralVecField) -> Result<SpectralVecField> {
    same_grid(u, p)?;
    let ku = Kinematics::of(u);
    let kp = Kinematics::of(p);
    Ok(project_pointwise(*u.grid(), |idx| {
        let a = kp.advected_by(ku.u(idx), idx);
        let b = ku.grad_transpose_times(kp.u(idx), idx);
        [b[0] - a[0], b[1] - a[1]]
    }))
}

/// `G(u) = μAu + B(u) + αu + βC(u)`.
pub fn g_apply(u: &SpectralVecField, params: &CbfParams) -> SpectralVecField {
    let ku = Kinematics::of(u);
    let nonlinear = project_pointwise(*u.grid(), |idx| {
        let uu = ku.u(idx);
        let adv = ku.advected_by(uu, idx);
        let c = pointwise::absorption(uu, params.r);
        [adv[0] + params.beta * c[0], adv[1] + params.beta * c[1]]
    });
    let g = *u.grid();
    let mut out = u.map_modes(|idx| params.mu * g.k_squared(idx) + params.alpha);
    out.axpy(1.0, &nonlinear);
    out
}

/// Explicit part of the right-hand side: `-B(u) - βC(u)`.
pub(crate) fn nonlinear_term(ku: &Kinematics, params: &CbfParams) -> SpectralVecField {
    project_pointwise(*ku.grid(), |idx| {
        let uu = ku.u(idx);
        let adv = ku.advected_by(uu, idx);
        let c = pointwise::absorption(uu, params.r);
        [-adv[0] - params.beta * c[0], -adv[1] - params.beta * c[1]]
    })
}

/// Linearization of [`nonlinear_term`] at `u` applied to `w`:
/// `-B'(u)w - βC'(u)w`.
pub(crate) fn tangent_term(ku: &Kinematics, w: &SpectralVecField, params: &CbfParams) -> SpectralVecField {
    let kw = Kinematics::of(w);
    project_pointwise(*ku.grid(), |idx| {
        let uu = ku.u(idx);
        let ww = kw.u(idx);
        let a = kw.advected_by(uu, idx);
        let b = ku.advected_by(ww, idx);
        let c = pointwise::absorption_prime(uu, ww, params.r, ku.guard);
        [
            -a[0] - b[0] - params.beta * c[0],
            -a[1] - b[1] - params.beta * c[1],
        ]
    })
}

/// Transpose of [`tangent_term`] in the `H` pairing:
/// `-(B'(u))*p - βC'(u)p`.
pub(crate) fn tangent_adjoint_term(
    ku: &Kinematics,
    p: &SpectralVecField,
    params: &CbfParams,
) -> SpectralVecField {
    let kp = Kinematics::of(p);
    project_pointwise(*ku.grid(), |idx| {
        let uu = ku.u(idx);
        let pp = kp.u(idx);
        let a = kp.advected_by(uu, idx);
        let b = ku.grad_transpose_times(pp, idx);
        let c = pointwise::absorption_prime(uu, pp, params.r, ku.guard);
        [
            a[0] - b[0] - params.beta * c[0],
            a[1] - b[1] - params.beta * c[1],
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_divfree_field, DealiasRule, Space};
    use num_complex::Complex64;

    fn grid() -> GridSpec {
        GridSpec::periodic(32, DealiasRule::OneHalf).unwrap()
    }

    fn field(seed: u64) -> SpectralVecField {
        random_divfree_field(grid(), seed, 1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn exponent_conversion() {
        assert_eq!(Exponent::try_from(3).unwrap(), Exponent::Three);
        assert_eq!(Exponent::try_from(4), Err(CbfError::UnsupportedExponent(4)));
        assert_eq!(u32::from(Exponent::Two), 2);
    }

    #[test]
    fn params_validation_and_criticality() {
        assert!(CbfParams::new(0.0, 0.0, 0.0, Exponent::One).is_err());
        assert!(CbfParams::new(1.0, -1.0, 0.0, Exponent::One).is_err());
        assert!(CbfParams::new(1.0, 0.0, -1.0, Exponent::One).is_err());
        assert!(CbfParams::new(1.0, 0.0, 0.5, Exponent::Three).unwrap().critical_monotone());
        assert!(!CbfParams::new(1.0, 0.0, 0.49, Exponent::Three).unwrap().critical_monotone());
        assert!(!CbfParams::new(1.0, 0.0, 5.0, Exponent::Two).unwrap().critical_monotone());
    }

    #[test]
    fn stokes_scales_mode_by_k_squared() {
        // k = (1, 2) with û ⟂ k.
        let one = Complex64::new(1.0, 0.0);
        let u = SpectralVecField::single_mode(grid(), 1, 2, [one * 2.0, -one]);
        let au = stokes_a(&u);
        assert_eq!(au, u.scaled(5.0));
        assert!(stokes_a(&SpectralVecField::zeros(grid())).is_zero());
    }

    #[test]
    fn stokes_pairing_matches_v_norm_and_is_symmetric() {
        let u = field(1);
        let v = field(2);
        assert!(rel(stokes_a(&u).dot_h(&u), u.norm_v().powi(2)) < 1e-14);
        let a = stokes_a(&u).dot_h(&v);
        let b = u.dot_h(&stokes_a(&v));
        assert!((a - b).abs() <= 1e-12 * u.norm_v() * v.norm_v());
        assert!(rel(u.inner(&u, Space::V).unwrap(), stokes_a(&u).dot_h(&u)) < 1e-14);
    }

    #[test]
    fn shear_flow_does_not_self_advect() {
        let g = grid();
        let u = PhysicalVecField::from_fn(g, |_, y| [y.sin(), 0.0]).to_spectral();
        let b = convection_b(&u, &u).unwrap();
        assert!(b.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn trilinear_form_is_antisymmetric() {
        let (u, v, w) = (field(3), field(4), field(5));
        let scale = u.norm_v() * v.norm_v() * w.norm_v();
        assert!(trilinear_b(&u, &v, &v).unwrap().abs() < 1e-11 * scale);
        let a = trilinear_b(&u, &v, &w).unwrap();
        let b = trilinear_b(&u, &w, &v).unwrap();
        assert!((a + b).abs() < 1e-11 * scale);
        let zero = SpectralVecField::zeros(grid());
        assert_eq!(trilinear_b(&zero, &v, &w).unwrap(), 0.0);
        assert_eq!(trilinear_b(&u, &zero, &w).unwrap(), 0.0);
        assert_eq!(trilinear_b(&u, &v, &zero).unwrap(), 0.0);
    }

    #[test]
    fn trilinear_bound_by_l4_norms() {
        use crate::spectral::Norm;
        let (u, v, w) = (field(6), field(7), field(8));
        let b = trilinear_b(&u, &v, &w).unwrap().abs();
        let bound = u.norm(Norm::L4).unwrap() * v.norm_v() * w.norm(Norm::L4).unwrap();
        assert!(bound - b >= 0.0);
    }

    #[test]
    fn linear_absorption_is_identity_on_solenoidal_fields() {
        let u = field(9);
        let c = absorption_c(&u, Exponent::One);
        assert!((&c - &u).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn absorption_pairing_is_lebesgue_norm() {
        use crate::spectral::Norm;
        let u = field(10);
        for r in [Exponent::One, Exponent::Two, Exponent::Three] {
            let lhs = absorption_c(&u, r).dot_h(&u);
            let rhs = u.norm(Norm::Lr1(r.value())).unwrap().powi(r.value() as i32 + 1);
            assert!(rel(lhs, rhs) < 1e-10, "r={r:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn absorption_derivative_is_positive() {
        for r in [Exponent::One, Exponent::Two, Exponent::Three] {
            let (u, v) = (field(11), field(12));
            assert!(c_prime(&u, &v, r).unwrap().dot_h(&v) >= -1e-12);
        }
    }

    #[test]
    fn second_derivative_requires_cubic_case() {
        let (u, v) = (field(13), field(14));
        assert!(c_double_prime(&u, &v, &v, Exponent::Two).is_err());
        let a = c_double_prime(&u, &v, &field(15), Exponent::Three).unwrap();
        let b = c_double_prime(&u, &field(15), &v, Exponent::Three).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn b_prime_on_self_doubles_b() {
        let u = field(16);
        let lhs = b_prime(&u, &u).unwrap();
        let rhs = convection_b(&u, &u).unwrap().scaled(2.0);
        assert!((&lhs - &rhs).max_abs_coeff() < 1e-13 * rhs.max_abs_coeff());
        let zero = SpectralVecField::zeros(grid());
        assert!(b_prime(&zero, &u).unwrap().is_zero());
        assert!(b_prime_adjoint(&zero, &u).unwrap().is_zero());
    }

    #[test]
    fn b_prime_adjoint_duality() {
        let (u, q, p) = (field(17), field(18), field(19));
        let lhs = b_prime(&u, &q).unwrap().dot_h(&p);
        let rhs = q.dot_h(&b_prime_adjoint(&u, &p).unwrap());
        let scale = u.norm_v() * q.norm_v() * p.norm_v();
        assert!((lhs - rhs).abs() < 1e-11 * scale);
        // p = u: ⟨B'(u)q, u⟩ = b(u,q,u) + b(q,u,u) = -b(u,u,q).
        let lhs = q.dot_h(&b_prime_adjoint(&u, &u).unwrap());
        let via_b = trilinear_b(&u, &q, &u).unwrap() + trilinear_b(&q, &u, &u).unwrap();
        assert!((lhs - via_b).abs() < 1e-11 * scale);
        assert!((lhs + trilinear_b(&u, &u, &q).unwrap()).abs() < 1e-11 * scale);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let other = random_divfree_field(GridSpec::periodic(16, DealiasRule::OneHalf).unwrap(), 1, 1.0);
        let u = field(20);
        assert!(matches!(convection_b(&u, &other), Err(CbfError::GridMismatch { .. })));
        assert!(b_prime(&u, &other).is_err());
        assert!(b_prime_adjoint(&u, &other).is_err());
        assert!(trilinear_b(&u, &u, &other).is_err());
    }

    #[test]
    fn g_apply_pieces() {
        let params = CbfParams::new(0.7, 0.2, 1.3, Exponent::Three).unwrap();
        let u = field(21);
        let g = g_apply(&u, &params);
        let mut linear = &g - &convection_b(&u, &u).unwrap();
        linear.axpy(-params.beta, &absorption_c(&u, params.r));
        let mut expected = stokes_a(&u).scaled(params.mu);
        expected.axpy(params.alpha, &u);
        assert!((&linear - &expected).max_abs_coeff() < 1e-13 * expected.max_abs_coeff());

        let lhs = g.dot_h(&u);
        let rhs = params.mu * u.norm_v().powi(2)
            + params.alpha * u.norm_h().powi(2)
            + params.beta * u.to_physical().lp_norm(4.0).powi(4);
        assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn g_apply_single_shear_mode_is_viscous() {
        let params = CbfParams::new(0.7, 0.0, 0.0, Exponent::Three).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let u = SpectralVecField::single_mode(grid(), 0, 3, [one, Complex64::default()]);
        let g = g_apply(&u, &params);
        assert!((&g - &u.scaled(0.7 * 9.0)).max_abs_coeff() < 1e-13);
    }
}
