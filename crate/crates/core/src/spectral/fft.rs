//! Two-dimensional FFTs on the square grid.
//!
//! Pairs of real fields are packed into one complex transform (`a + i b`),
//! which halves the transform count for the two velocity components.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn with_plans<R>(n: usize, f: impl FnOnce(&Plans) -> R) -> R {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        let plans = map.entry(n).or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            }
        });
        f(plans)
    })
}

fn transpose(n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

fn fft2_in_place(n: usize, data: &mut [Complex64], inverse: bool) {
    with_plans(n, |plans| {
        let fft = if inverse { &plans.inverse } else { &plans.forward };
        let mut tmp = vec![Complex64::default(); n * n];
        fft.process(data);
        transpose(n, data, &mut tmp);
        fft.process(&mut tmp);
        transpose(n, &tmp, data);
    });
}

/// Evaluates two conjugate-symmetric coefficient arrays on the grid.
///
/// Output samples are `u(x) = Σ_k û(k) e^{ik·x}` (Fourier-series convention).
pub fn inverse_pair(n: usize, a_hat: &[Complex64], b_hat: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a_hat.iter().zip(b_hat).map(|(a, b)| a + i * b).collect();
    fft2_in_place(n, &mut z, true);
    let a = z.iter().map(|c| c.re).collect();
    let b = z.iter().map(|c| c.im).collect();
    (a, b)
}

/// Fourier-series coefficients of two real sample arrays.
///
/// The results are exactly conjugate-symmetric by construction.
pub fn forward_pair(n: usize, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    fft2_in_place(n, &mut z, false);
    let scale = 1.0 / (n * n) as f64;
    let mut a_hat = vec![Complex64::default(); n * n];
    let mut b_hat = vec![Complex64::default(); n * n];
    for row in 0..n {
        let mrow = (n - row) % n;
        for col in 0..n {
            let idx = row * n + col;
            let mirror = mrow * n + (n - col) % n;
            let zk = z[idx] * scale;
            let zm = z[mirror].conj() * scale;
            a_hat[idx] = (zk + zm) * 0.5;
            // (zk - zm) / (2i)
            let d = (zk - zm) * 0.5;
            b_hat[idx] = Complex64::new(d.im, -d.re);
        }
    }
    (a_hat, b_hat)
}
