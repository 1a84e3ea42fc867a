//! Small numerical helpers shared by the convergence checks.

/// Least-squares slope of `ln y` against `ln x`.
///
/// Returns `f64::INFINITY` when every `y` is exactly zero (the quantity
/// vanishes identically) and NaN when some but not all are zero.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if y.iter().all(|&v| v == 0.0) {
        return f64::INFINITY;
    }
    if y.iter().any(|&v| v <= 0.0) {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x = [1.0, 0.5, 0.25];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&x, &[0.0; 3]), f64::INFINITY);
        assert!(loglog_slope(&x, &[1.0, 0.0, 1.0]).is_nan());
    }
}
