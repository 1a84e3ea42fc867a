use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{axpy_vec, optimize, ControlProblem, OptimReport, OptimizerConfig};
use crate::error::{CbfError, Result};
use crate::spectral::{unit_noise_field, SpectralVecField};

/// Worker pool sized by the `CBF_THREADS` environment variable, or by rayon's
/// default when it is unset or not a positive integer.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var("CBF_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CbfError::InvalidParameter(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistartEntry {
    pub horizon: f64,
    /// Largest distance between two computed optima.
    pub max_pairwise_distance: f64,
    /// Norm of the first computed optimum.
    pub optimum_norm: f64,
    pub reports: Vec<OptimReport>,
}

impl MultistartEntry {
    /// Distance between optima relative to their size.
    pub fn relative_spread(&self) -> f64 {
        self.max_pairwise_distance / self.optimum_norm.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistartReport {
    pub entries: Vec<MultistartEntry>,
}

/// Runs the optimizer from `starts` starting points for each horizon and
/// measures how far apart the resulting optima are.
///
/// Start `0` is the zero control; start `i > 0` adds `start_scale` times a
/// random unit field at every node, drawn from seed `cfg.seed + i`. Starts run
/// in parallel; results do not depend on the thread count.
pub fn multistart_uniqueness<F>(
    build: F,
    horizons: &[f64],
    starts: usize,
    start_scale: f64,
    cfg: &OptimizerConfig,
) -> Result<MultistartReport>
where
    F: Fn(f64) -> Result<ControlProblem> + Sync,
{
    if starts < 2 {
        return Err(CbfError::InvalidParameter("need at least two starting points".into()));
    }
    let pool = thread_pool()?;
    let mut entries = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let problem = build(horizon)?;
        let reports = pool.install(|| {
            (0..starts)
                .into_par_iter()
                .map(|i| optimize(&problem, start_point(&problem, i, start_scale, cfg.seed), cfg))
                .collect::<Result<Vec<_>>>()
        })?;
        let mut max_pairwise_distance = 0.0f64;
        for (i, a) in reports.iter().enumerate() {
            for b in &reports[i + 1..] {
                let d = problem.norm(&axpy_vec(&a.optimum, -1.0, &b.optimum));
                max_pairwise_distance = max_pairwise_distance.max(d);
            }
        }
        entries.push(MultistartEntry {
            horizon,
            max_pairwise_distance,
            optimum_norm: problem.norm(&reports[0].optimum),
            reports,
        });
    }
    Ok(MultistartReport { entries })
}

fn start_point(problem: &ControlProblem, i: usize, scale: f64, seed: u64) -> Vec<SpectralVecField> {
    let mut x = problem.zero_decision();
    if i == 0 {
        return x;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
    let grid = *problem.model.grid();
    for f in x.iter_mut() {
        *f = unit_noise_field(grid, &mut rng).scaled(scale);
    }
    x
}
