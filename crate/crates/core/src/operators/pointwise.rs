//! Pointwise kernels of the absorption term `|u|^{r-1}u` and its derivatives.

use super::Exponent;

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `|u|^{r-1} u`.
#[inline]
pub fn absorption(u: [f64; 2], r: Exponent) -> [f64; 2] {
    let w = match r {
        Exponent::One => 1.0,
        Exponent::Two => dot(u, u).sqrt(),
        Exponent::Three => dot(u, u),
    };
    [w * u[0], w * u[1]]
}

/// First derivative of [`absorption`] at `u` in direction `v`.
///
/// For `r = 2` the unit-vector factor `u/|u|` is replaced by zero wherever
/// `|u| <= guard`.
#[inline]
pub fn absorption_prime(u: [f64; 2], v: [f64; 2], r: Exponent, guard: f64) -> [f64; 2] {
    match r {
        Exponent::One => v,
        Exponent::Two => {
            let m = dot(u, u).sqrt();
            if m <= guard {
                return [0.0, 0.0];
            }
            let uv = dot(u, v) / m;
            [m * v[0] + uv * u[0], m * v[1] + uv * u[1]]
        }
        Exponent::Three => {
            let m2 = dot(u, u);
            let uv = 2.0 * dot(u, v);
            [m2 * v[0] + uv * u[0], m2 * v[1] + uv * u[1]]
        }
    }
}

/// Second derivative of the cubic absorption:
/// `2[(u·w)v + (u·v)w + (w·v)u]`.
#[inline]
pub fn absorption_second(u: [f64; 2], v: [f64; 2], w: [f64; 2]) -> [f64; 2] {
    let uw = dot(u, w);
    let uv = dot(u, v);
    let wv = dot(w, v);
    [
        2.0 * (uw * v[0] + uv * w[0] + wv * u[0]),
        2.0 * (uw * v[1] + uv * w[1] + wv * u[1]),
    ]
}
