//! The runnable invariant suite: operator identities, monotonicity, solver
//! convergence, adjoint exactness and optimality conditions.
//!
//! Every check reports its worst measured quantity next to the tolerance it
//! was compared against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adjoint::{adjoint_bound_margin, duality_check, solve_adjoint, AdjointRhs, AdjointSpec};
use crate::assimilation::{assimilate, generate_twin_data, recovery_error, TwinSettings, TWIN_WEIGHTS};
use crate::control::{
    multistart_uniqueness, optimize, pontryagin_residual, second_order_report, ControlProblem, CostConfig,
    CostWeights, OptimizerConfig, Termination,
};
use crate::error::Result;
use crate::forward::{
    apriori_bound_check, control_lipschitz_check, energy_equality_residual, solve_forward, solve_forward_observed,
    ControlOperator, FieldSeries, Model, StateRun, TimeGrid,
};
use crate::linearized::{gateaux_check, linearized_energy_margin};
use crate::operators::{
    absorption_c, absorption_lp_bound, b_prime, b_prime_adjoint, c_double_prime, c_prime, g_apply,
    monotonicity_check, trilinear_b, CbfParams, Exponent, MonotonicityMode,
};
use crate::spectral::{random_divfree_field_from_rng, DealiasRule, GridSpec, Norm, PhysicalVecField, Space, SpectralVecField};
use crate::stats::loglog_slope;

const EXPONENTS: [Exponent; 3] = [Exponent::One, Exponent::Two, Exponent::Three];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Passes when `margin <= tolerance`.
    AtMost,
    /// Passes when `margin >= -tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub margin: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub passed: bool,
}

impl CheckResult {
    pub fn at_most(name: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            margin,
            tolerance,
            criterion: Criterion::AtMost,
            passed: margin <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            margin,
            tolerance,
            criterion: Criterion::AtLeast,
            passed: margin >= -tolerance,
        }
    }
}

/// Sizes of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    /// Grid size of the operator and monotonicity samples.
    pub n: usize,
    pub seed: u64,
    /// Random fields per operator identity.
    pub samples: usize,
    /// Random pairs per monotonicity bound.
    pub pairs: usize,
    /// Random duality instances per exponent.
    pub instances: usize,
    /// Random directions per finite-difference gradient check.
    pub directions: usize,
    /// Random perturbations of the second-order form.
    pub perturbations: usize,
    /// Also run the optimization, twin and multistart checks.
    pub optimization: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 16,
            seed: 0,
            samples: 20,
            pairs: 50,
            instances: 5,
            directions: 10,
            perturbations: 20,
            optimization: true,
        }
    }
}

/// Runs every suite.
pub fn run_verification(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = operator_identity_suite(cfg.n, cfg.seed, cfg.samples)?;
    out.extend(monotonicity_suite(cfg.n, cfg.seed, cfg.pairs)?);
    out.extend(forward_suite(cfg.n.max(16))?);
    out.extend(adjoint_suite(cfg.seed, cfg.instances, cfg.directions)?);
    if cfg.optimization {
        out.extend(optimality_suite(cfg.seed, cfg.perturbations)?);
        out.extend(twin_suite(cfg.seed)?);
        out.extend(uniqueness_suite(cfg.seed)?);
    }
    Ok(out)
}

fn grid(n: usize, rule: DealiasRule) -> Result<GridSpec> {
    GridSpec::periodic(n, rule)
}

fn random_field(g: GridSpec, rng: &mut ChaCha8Rng) -> SpectralVecField {
    let decay = rng.random_range(0.5..2.0);
    let amp = rng.random_range(0.1..10.0);
    let u = random_divfree_field_from_rng(g, rng, decay);
    let norm = u.norm_h();
    u.scaled(amp / norm)
}

fn ip(a: &SpectralVecField, b: &SpectralVecField) -> Result<f64> {
    a.inner(b, Space::H)
}

/// Worst normalized defect of each exact operator identity over `samples`
/// random fields.
pub fn operator_identity_suite(n: usize, seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_thirds = grid(n, DealiasRule::TwoThirds)?;
    let one_half = grid(n, DealiasRule::OneHalf)?;
    let tol = 1e-10;

    let (mut anti_vv, mut anti_vw, mut taylor, mut duality) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut pairing = [0.0f64; 3];
    let mut positivity = [f64::INFINITY; 3];
    let mut monotone = [f64::INFINITY; 3];
    let mut lp = [f64::INFINITY; 3];
    for _ in 0..samples {
        let g = if rng.random_bool(0.5) { two_thirds } else { one_half };
        let (u, v, w) = (random_field(g, &mut rng), random_field(g, &mut rng), random_field(g, &mut rng));
        let scale = u.norm_v() * v.norm_v() * w.norm_v();
        anti_vv = anti_vv.max(trilinear_b(&u, &v, &v)?.abs() / scale);
        anti_vw = anti_vw.max((trilinear_b(&u, &v, &w)? + trilinear_b(&u, &w, &v)?).abs() / scale);
        duality = duality.max((ip(&b_prime(&u, &v)?, &w)? - ip(&v, &b_prime_adjoint(&u, &w)?)?).abs() / scale);

        for (i, r) in EXPONENTS.into_iter().enumerate() {
            let p = r.value() as f64 + 1.0;
            let cu = absorption_c(&u, r);
            let lr = u.norm(Norm::Lr1(r.value()))?.powf(p);
            pairing[i] = pairing[i].max((ip(&cu, &u)? - lr).abs() / lr.max(1.0));
            let cv = ip(&c_prime(&u, &v, r)?, &v)?;
            positivity[i] = positivity[i].min(cv / (1.0 + cv.abs()));
            let diff = &cu - &absorption_c(&v, r);
            let params = CbfParams::new(1.0, 0.0, 1.0, r)?;
            let m = monotonicity_check(&u, &v, &params, MonotonicityMode::Absorption)?;
            monotone[i] = monotone[i].min(m / (1.0 + diff.norm_h() * u.distance_h(&v)));
            let s = absorption_lp_bound(&u, &v, r)?;
            lp[i] = lp[i].min(s / (1.0 + (&u - &v).to_physical().lp_norm(p).powf(p)));
        }

        let (a, b) = (u.scaled(0.5), v.scaled(0.5));
        let r = Exponent::Three;
        let lhs = absorption_c(&(&a + &b), r);
        let mut rhs = absorption_c(&a, r);
        rhs.axpy(1.0, &c_prime(&a, &b, r)?);
        rhs.axpy(0.5, &c_double_prime(&a, &b, &b, r)?);
        rhs.axpy(1.0, &absorption_c(&b, r));
        taylor = taylor.max(lhs.distance_h(&rhs) / (1.0 + lhs.norm_h()));
    }

    let mut out = vec![
        CheckResult::at_most("convection b(u,v,v) = 0", anti_vv, tol),
        CheckResult::at_most("convection antisymmetry b(u,v,w) = -b(u,w,v)", anti_vw, tol),
        CheckResult::at_most("convection derivative duality", duality, tol),
        CheckResult::at_most("cubic absorption Taylor expansion", taylor, tol),
    ];
    for (i, r) in EXPONENTS.into_iter().enumerate() {
        let r = r.value();
        out.push(CheckResult::at_most(format!("absorption pairing <C(u),u> (r={r})"), pairing[i], tol));
        out.push(CheckResult::at_least(format!("absorption derivative positivity (r={r})"), positivity[i], tol));
        out.push(CheckResult::at_least(format!("absorption monotonicity (r={r})"), monotone[i], tol));
        out.push(CheckResult::at_least(format!("absorption L^(r+1) lower bound (r={r})"), lp[i], tol));
    }
    Ok(out)
}

/// Local (`N = ‖v‖_L4`) and global (`2βμ ≥ 1`) monotonicity of the full
/// operator over `pairs` random pairs.
pub fn monotonicity_suite(n: usize, seed: u64, pairs: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let g = grid(n, DealiasRule::OneHalf)?;
    let mut local = [f64::INFINITY; 3];
    let mut global = f64::INFINITY;
    for _ in 0..pairs {
        let u = random_field(g, &mut rng);
        let v = random_field(g, &mut rng);
        let mu = rng.random_range(0.05..2.0);
        for (i, r) in EXPONENTS.into_iter().enumerate() {
            let params = CbfParams::new(mu, rng.random_range(0.0..1.0), rng.random_range(0.0..2.0), r)?;
            let n4 = v.norm(Norm::L4)?;
            let m = monotonicity_check(&u, &v, &params, MonotonicityMode::Local(n4))?;
            let scale = 1.0 + (&g_apply(&u, &params) - &g_apply(&v, &params)).norm_h() * u.distance_h(&v);
            local[i] = local[i].min(m / scale);
        }
        let beta = rng.random_range(1.0..3.0) / (2.0 * mu);
        let params = CbfParams::new(mu, rng.random_range(0.0..1.0), beta, Exponent::Three)?;
        let m = monotonicity_check(&u, &v, &params, MonotonicityMode::Global)?;
        let scale = 1.0 + (&g_apply(&u, &params) - &g_apply(&v, &params)).norm_h() * u.distance_h(&v);
        global = global.min(m / scale);
    }
    let mut out: Vec<CheckResult> = EXPONENTS
        .into_iter()
        .zip(local)
        .map(|(r, m)| CheckResult::at_least(format!("local monotonicity (r={})", r.value()), m, 1e-10))
        .collect();
    out.push(CheckResult::at_least("global monotonicity (r=3, 2βμ >= 1)", global, 1e-10));
    Ok(out)
}

/// Observed order of the time stepper against closed-form solutions, the
/// energy budget and the a-priori bound.
pub fn forward_suite(n: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let g = grid(16, DealiasRule::OneHalf)?;
    let shear = |a: f64| PhysicalVecField::from_fn(g, move |_, y| [a * y.sin(), 0.0]).to_spectral();

    // r = 1 damping: u(t) = e^{-(μ+α+β)t} u0.
    let params = CbfParams::new(0.5, 0.2, 1.5, Exponent::One)?;
    let model = Model::unforced(params, g);
    let u0 = shear(2.0);
    let rate = params.mu + params.alpha + params.beta;
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let mut errs = Vec::new();
    for &dt in &dts {
        let time = TimeGrid::new(1.0, dt)?;
        let mut worst = 0.0f64;
        solve_forward_observed(&u0, &model, &[], time, 10, |k, u| {
            let exact = u0.scaled((-rate * time.time(k)).exp());
            worst = worst.max(u.distance_h(&exact) / exact.norm_h());
        })?;
        errs.push(worst);
    }
    let slope = loglog_slope(&dts, &errs);
    out.push(CheckResult::at_most("closed-form decay error order 2", (slope - 2.0).abs(), 0.2));

    // Energy equality residual order, β = 0 shear flow.
    let params = CbfParams::new(0.3, 0.1, 0.0, Exponent::Three)?;
    let model = Model::unforced(params, g);
    let dts = [0.1, 0.05, 0.025];
    let mut res = Vec::new();
    for &dt in &dts {
        let (traj, ledger) = solve_forward(&shear(1.5), &model, &[], TimeGrid::new(1.0, dt)?)?;
        res.push(energy_equality_residual(&traj, &ledger));
    }
    let slope = loglog_slope(&dts, &res);
    out.push(CheckResult::at_most("energy equality residual order 2", (slope - 2.0).abs(), 0.2));

    // Forced, controlled cubic run.
    let g = grid(n, DealiasRule::OneHalf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = CbfParams::new(0.05, 0.1, 0.5, Exponent::Three)?;
    let f = random_divfree_field_from_rng(g, &mut rng, 2.0).scaled(2.0);
    let model = Model::new(params, ControlOperator::low_modes(g, 3), FieldSeries::Constant(f));
    let time = TimeGrid::new(0.5, 1e-3)?;
    let shape = random_divfree_field_from_rng(g, &mut rng, 1.0);
    let controls: Vec<_> = (0..=time.steps())
        .map(|k| shape.scaled((3.0 * time.time(k)).cos()))
        .collect();
    let u0 = random_divfree_field_from_rng(g, &mut rng, 1.5);
    let u0 = u0.scaled(2.0 / u0.norm_h());
    let (traj, ledger) = solve_forward(&u0, &model, &controls, time)?;
    out.push(CheckResult::at_most(
        "energy equality residual, forced run",
        energy_equality_residual(&traj, &ledger),
        1e-4,
    ));
    let margin = apriori_bound_check(&traj, &ledger, &model, &controls)?;
    out.push(CheckResult::at_least("a-priori energy bound", margin / ledger.k_t, 1e-6));

    let time = TimeGrid::new(0.2, 2e-3)?;
    let base = &controls[..=time.steps()];
    let dir: Vec<_> = (0..=time.steps()).map(|k| shape.scaled(1.0 + time.time(k))).collect();
    let lip = control_lipschitz_check(&u0, &model, base, &dir, &[0.1, 0.05, 0.025], time)?;
    out.push(CheckResult::at_most("control-to-state Lipschitz constant drift", lip.constant_drift(), 0.05));
    let worst = lip.constants.iter().cloned().fold(0.0, f64::max);
    out.push(CheckResult::at_least(
        "control-to-state Lipschitz analytic bound (log ratio)",
        (lip.analytic_constant / worst).ln(),
        0.0,
    ));
    Ok(out)
}

struct Instance {
    model: Model,
    u0: SpectralVecField,
    controls: Vec<SpectralVecField>,
    time: TimeGrid,
}

fn unit_series(g: GridSpec, rng: &mut ChaCha8Rng, len: usize, norm: f64) -> Vec<SpectralVecField> {
    (0..len)
        .map(|_| {
            let u = random_divfree_field_from_rng(g, rng, 1.0);
            u.scaled(norm / u.norm_h())
        })
        .collect()
}

fn unit_field(g: GridSpec, rng: &mut ChaCha8Rng, norm: f64) -> SpectralVecField {
    unit_series(g, rng, 1, norm).pop().expect("one field")
}

fn instance(r: Exponent, k: usize, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let g = grid(16, DealiasRule::OneHalf)?;
    let params = CbfParams::new(rng.random_range(0.05..0.5), rng.random_range(0.0..0.5), rng.random_range(0.0..1.5), r)?;
    let control = match k % 3 {
        0 => ControlOperator::identity(g),
        1 => ControlOperator::low_modes(g, 2),
        _ => ControlOperator::region_from_fn(g, |x, y| if x.sin() * y.cos() > 0.0 { 1.0 } else { 0.25 })?,
    };
    let model = Model::new(params, control, FieldSeries::Constant(unit_field(g, rng, 0.5)));
    let time = TimeGrid::new(0.1, 1e-2)?;
    let norm = rng.random_range(0.5..2.0);
    Ok(Instance {
        u0: unit_field(g, rng, norm),
        controls: unit_series(g, rng, time.steps() + 1, 0.3),
        model,
        time,
    })
}

/// Discrete duality, energy bounds of the tangent and adjoint systems,
/// the Gateaux limit and finite-difference gradients.
pub fn adjoint_suite(seed: u64, instances: usize, directions: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut out = Vec::new();
    let mut tangent_margin = f64::INFINITY;
    let mut adjoint_margin = f64::INFINITY;
    for r in EXPONENTS {
        let mut worst = 0.0f64;
        for k in 0..instances {
            let s = instance(r, k, &mut rng)?;
            let g = *s.model.grid();
            let len = s.time.steps() + 1;
            let (traj, _) = solve_forward(&s.u0, &s.model, &s.controls, s.time)?;
            let run = StateRun::new(&s.model, &s.controls, &traj);
            let spec = AdjointSpec {
                terminal: unit_field(g, &mut rng, 1.0),
                rhs: AdjointRhs::Series(unit_series(g, &mut rng, len, 1.0)),
            };
            let w0 = unit_field(g, &mut rng, 1.0);
            let src = unit_series(g, &mut rng, len, 1.0);
            worst = worst.max(duality_check(&run, &w0, &src, &spec)?);
            let scale = 1.0 + w0.norm_h().powi(2);
            tangent_margin = tangent_margin.min(linearized_energy_margin(&run, &w0, &src)? / scale);
            let p = solve_adjoint(&run, &spec)?;
            adjoint_margin = adjoint_margin.min(adjoint_bound_margin(&run, &spec, &p)? / scale);
        }
        out.push(CheckResult::at_most(format!("tangent/adjoint duality (r={})", r.value()), worst, 1e-11));
    }
    out.push(CheckResult::at_least("tangent energy bound", tangent_margin, 1e-6));
    out.push(CheckResult::at_least("adjoint energy bound", adjoint_margin, 1e-6));

    let g = grid(32, DealiasRule::OneHalf)?;
    let params = CbfParams::new(0.1, 0.2, 0.8, Exponent::Three)?;
    let model = Model::new(params, ControlOperator::identity(g), FieldSeries::Constant(unit_field(g, &mut rng, 0.5)));
    let time = TimeGrid::new(0.1, 1e-2)?;
    let base = unit_series(g, &mut rng, time.steps() + 1, 0.3);
    let dir = unit_series(g, &mut rng, time.steps() + 1, 1.0);
    let u0 = unit_field(g, &mut rng, 2.0);
    let report = gateaux_check(&u0, &model, &base, &dir, time, &[1e-1, 5e-2, 2.5e-2, 1.25e-2])?;
    out.push(CheckResult::at_least("Gateaux remainder order >= 0.9", report.slope() - 0.9, 0.0));

    let (distributed, initial) = gradient_problems(&mut rng)?;
    for (name, p) in [("distributed", &distributed), ("initial-data", &initial)] {
        let g = *p.model.grid();
        let x = unit_series(g, &mut rng, p.decision_len(), 0.5);
        let mut worst = 0.0f64;
        for _ in 0..directions {
            let d = unit_series(g, &mut rng, p.decision_len(), 1.0);
            worst = worst.max(p.gradient_fd_error(&x, &d, 1e-4)?);
        }
        out.push(CheckResult::at_most(format!("finite-difference gradient ({name})"), worst, 1e-7));
    }
    Ok(out)
}

fn gradient_problems(rng: &mut ChaCha8Rng) -> Result<(ControlProblem, ControlProblem)> {
    let g = grid(16, DealiasRule::OneHalf)?;
    let params = CbfParams::new(0.1, 0.1, 0.5, Exponent::Three)?;
    let model = Model::new(params, ControlOperator::low_modes(g, 3), FieldSeries::Constant(unit_field(g, rng, 0.5)));
    let time = TimeGrid::new(0.1, 1e-2)?;
    let cost = CostConfig::new(
        FieldSeries::Constant(unit_field(g, rng, 1.0)),
        Some(unit_field(g, rng, 0.5)),
        CostWeights::default(),
    )?;
    let u0 = unit_field(g, rng, 1.5);
    Ok((
        ControlProblem::distributed(model.clone(), cost.clone(), time, u0),
        ControlProblem::initial_data(model, cost, time),
    ))
}

/// Pontryagin identity at every iterate of a converged run and the sign of
/// the second-order form around its optimum.
pub fn optimality_suite(seed: u64, perturbations: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let (problem, initial) = gradient_problems(&mut rng)?;
    let cfg = OptimizerConfig {
        grad_tol: 1e-9,
        max_iters: 200,
        ..OptimizerConfig::default()
    };
    let mut out = Vec::new();
    for (name, p) in [("distributed", &problem), ("initial-data", &initial)] {
        let report = optimize(p, p.zero_decision(), &cfg)?;
        out.push(CheckResult::at_most(
            format!("optimizer converged ({name})"),
            if report.termination == Termination::Converged { 0.0 } else { 1.0 },
            0.0,
        ));
        let eval = p.evaluate(&report.optimum, true)?;
        let grad = eval.gradient.as_ref().expect("gradient requested");
        let gn2 = p.inner(grad, grad);
        let res = pontryagin_residual(p, &report.optimum, &eval)?;
        let defect = (4.0 * p.cost.weights.control * res - gn2).abs() / gn2.max(f64::MIN_POSITIVE);
        out.push(CheckResult::at_most(format!("Pontryagin residual = |grad J|^2/(4w) ({name})"), defect, 1e-10));

        let g = *p.model.grid();
        let deltas: Vec<_> = (0..perturbations)
            .map(|k| unit_series(g, &mut rng, p.decision_len(), 0.05 * (1 + k % 4) as f64))
            .collect();
        let q = second_order_report(p, &report.optimum, &deltas)?;
        out.push(CheckResult::at_least(format!("second-order form Q >= 0 ({name})"), q.min_relative(), 1e-6));
    }
    Ok(out)
}

/// Zero-noise twin recovery at `n = 32`, `T = 0.25` and monotone dependence
/// of the recovery error on the noise level.
pub fn twin_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let g = grid(32, DealiasRule::OneHalf)?;
    let params = CbfParams::new(0.1, 0.1, 0.5, Exponent::Three)?;
    let model = Model::new(params, ControlOperator::identity(g), FieldSeries::Constant(unit_field(g, &mut rng, 0.5)));
    let time = TimeGrid::new(0.25, 1e-2)?;
    let truth = {
        let u = random_divfree_field_from_rng(g, &mut rng, 1.5);
        u.scaled(1.0 / u.norm_h())
    };
    let opt = OptimizerConfig {
        grad_tol: 1e-8,
        max_iters: 200,
        ..OptimizerConfig::default()
    };
    let mut errors = Vec::new();
    for noise_level in [1e-1, 1e-2, 0.0] {
        let twin = TwinSettings {
            noise_level,
            seed: seed.wrapping_add(5),
        };
        let data = generate_twin_data(&truth, &model, time, twin, TWIN_WEIGHTS)?;
        let (est, _) = assimilate(&data, &model, time, &opt, None)?;
        errors.push(recovery_error(&est, &truth));
    }
    let monotone = errors[0] > errors[1] && errors[1] > errors[2];
    Ok(vec![
        CheckResult::at_most("twin experiment recovery error (noise 0)", errors[2], 5e-2),
        CheckResult::at_most(
            "twin recovery error decreases with noise",
            if monotone { 0.0 } else { 1.0 },
            0.0,
        ),
    ])
}

/// Multistart optimization at a short horizon; returns the spread of the
/// optima relative to their norm.
pub fn uniqueness_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
    let g = grid(16, DealiasRule::OneHalf)?;
    let params = CbfParams::new(0.1, 0.1, 0.5, Exponent::Three)?;
    let model = Model::new(params, ControlOperator::low_modes(g, 3), FieldSeries::Constant(unit_field(g, &mut rng, 0.5)));
    let u0 = unit_field(g, &mut rng, 1.0);
    let target = unit_field(g, &mut rng, 1.0);
    let build = |t: f64| -> Result<ControlProblem> {
        let cost = CostConfig::new(FieldSeries::Constant(target.clone()), Some(target.clone()), CostWeights::default())?;
        Ok(ControlProblem::distributed(model.clone(), cost, TimeGrid::new(t, 1e-2)?, u0.clone()))
    };
    let cfg = OptimizerConfig {
        grad_tol: 1e-10,
        max_iters: 200,
        seed,
        ..OptimizerConfig::default()
    };
    let report = multistart_uniqueness(build, &[0.05], 4, 1.0, &cfg)?;
    let entry = &report.entries[0];
    Ok(vec![CheckResult::at_most(
        "multistart optima coincide (T=0.05)",
        entry.relative_spread(),
        1e-5,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes_and_is_large_enough() {
        let checks = run_verification(&VerifyConfig::default()).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.len() >= 25, "{}", checks.len());
    }

    #[test]
    fn criteria_compare_against_tolerance() {
        assert!(CheckResult::at_most("a", 1.0, 1.0).passed);
        assert!(!CheckResult::at_most("a", 1.1, 1.0).passed);
        assert!(CheckResult::at_least("b", -0.5, 1.0).passed);
        assert!(!CheckResult::at_least("b", -1.5, 1.0).passed);
        assert!(!CheckResult::at_most("nan", f64::NAN, 1.0).passed);
    }
}
