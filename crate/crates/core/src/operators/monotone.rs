//! Slack of the monotonicity inequalities for `G` and for the absorption
//! term. Each function returns `left - right` of the inequality, so a
//! nonnegative value means the inequality holds.

use serde::{Deserialize, Serialize};

use super::{absorption_c, g_apply, CbfParams, Exponent};
use crate::error::{CbfError, Result};
use crate::spectral::SpectralVecField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MonotonicityMode {
    /// Local monotonicity on the `L⁴` ball of radius `N` around the origin.
    Local(f64),
    /// Global monotonicity, valid for `r = 3` with `2βμ >= 1`.
    Global,
    /// Monotonicity of the absorption term with the weighted lower bound.
    Absorption,
}

/// `⟨G(u) - G(v), u - v⟩` plus the correction term of the chosen mode.
pub fn monotonicity_check(
    u: &SpectralVecField,
    v: &SpectralVecField,
    params: &CbfParams,
    mode: MonotonicityMode,
) -> Result<f64> {
    u.grid().same_as(v.grid())?;
    let diff = u - v;
    match mode {
        MonotonicityMode::Local(radius) => {
            let nv = v.to_physical().lp_norm(4.0);
            if nv.partial_cmp(&(radius * (1.0 + 1e-12))).is_none_or(|o| o.is_gt()) {
                return Err(CbfError::Precondition(format!(
                    "v must lie in the L4 ball of radius {radius}, ‖v‖_L4 = {nv}"
                )));
            }
            let pairing = (&g_apply(u, params) - &g_apply(v, params)).dot_h(&diff);
            let correction = 27.0 / (32.0 * params.mu.powi(3)) * radius.powi(4) * diff.norm_h().powi(2);
            Ok(pairing + correction)
        }
        MonotonicityMode::Global => {
            if !params.critical_monotone() {
                return Err(CbfError::Precondition(format!(
                    "global monotonicity needs r=3 and 2βμ >= 1, got r={}, 2βμ={}",
                    params.r.value(),
                    2.0 * params.beta * params.mu
                )));
            }
            Ok((&g_apply(u, params) - &g_apply(v, params)).dot_h(&diff))
        }
        MonotonicityMode::Absorption => {
            let pairing = (&absorption_c(u, params.r) - &absorption_c(v, params.r)).dot_h(&diff);
            let (wu, wv) = weighted_differences(u, v, params.r);
            Ok(pairing - 0.5 * wu - 0.5 * wv)
        }
    }
}

/// Slack of `2^{r-2}(‖|u|^{(r-1)/2}(u-v)‖² + ‖|v|^{(r-1)/2}(u-v)‖²) >= ‖u-v‖_{L^{r+1}}^{r+1}`,
/// with the factor replaced by 1 for `r < 3`.
pub fn absorption_lp_bound(u: &SpectralVecField, v: &SpectralVecField, r: Exponent) -> Result<f64> {
    u.grid().same_as(v.grid())?;
    let (wu, wv) = weighted_differences(u, v, r);
    let factor = if r == Exponent::Three { 2.0 } else { 1.0 };
    let p = r.value() as f64 + 1.0;
    let lhs = (u - v).to_physical().lp_norm(p).powf(p);
    Ok(factor * (wu + wv) - lhs)
}

/// `‖|u|^{(r-1)/2}(u-v)‖²_H` and `‖|v|^{(r-1)/2}(u-v)‖²_H`, by grid quadrature.
fn weighted_differences(u: &SpectralVecField, v: &SpectralVecField, r: Exponent) -> (f64, f64) {
    let pu = u.to_physical();
    let pv = v.to_physical();
    let h = u.grid().spacing();
    let e = r.value() as f64 - 1.0;
    let (mut su, mut sv) = (0.0, 0.0);
    for idx in 0..u.grid().len() {
        let a = pu.sample(idx);
        let b = pv.sample(idx);
        let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        su += magnitude(a).powf(e) * d2;
        sv += magnitude(b).powf(e) * d2;
    }
    (h * h * su, h * h * sv)
}

fn magnitude(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

