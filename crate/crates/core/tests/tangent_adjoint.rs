use cbf_core::adjoint::{adjoint_bound_margin, duality_check, solve_adjoint, AdjointRhs, AdjointSpec};
use cbf_core::forward::{
    solve_forward, ControlOperator, FieldSeries, Forcing, Model, StateRun, TimeGrid, Trajectory,
};
use cbf_core::linearized::{gateaux_check, linearized_energy_margin, solve_linearized, solve_linearized_observed};
use cbf_core::operators::{CbfParams, Exponent};
use cbf_core::spectral::{random_divfree_field, DealiasRule, GridSpec, SpectralVecField};
use cbf_core::CbfError;
use num_complex::Complex64;

fn grid(n: usize) -> GridSpec {
    GridSpec::periodic(n, DealiasRule::OneHalf).unwrap()
}

fn unit(g: GridSpec, seed: u64, norm: f64) -> SpectralVecField {
    let u = random_divfree_field(g, seed, 1.0);
    u.scaled(norm / u.norm_h())
}

fn series(g: GridSpec, seed: u64, len: usize, norm: f64) -> Vec<SpectralVecField> {
    (0..len).map(|n| unit(g, seed + n as u64, norm)).collect()
}

fn single_mode(g: GridSpec) -> SpectralVecField {
    let one = Complex64::new(1.0, 0.0);
    SpectralVecField::single_mode(g, 2, 1, [one, -one * 2.0])
}

struct Setup {
    u0: SpectralVecField,
    model: Model,
    controls: Vec<SpectralVecField>,
    time: TimeGrid,
}

fn setup(r: Exponent, control: fn(GridSpec) -> ControlOperator, n: usize) -> Setup {
    let g = grid(n);
    let params = CbfParams::new(0.1, 0.2, 0.8, r).unwrap();
    let model = Model::new(params, control(g), Forcing::Constant(unit(g, 900, 0.5)));
    let time = TimeGrid::new(0.2, 1e-2).unwrap();
    let controls = series(g, 500, time.steps() + 1, 0.3);
    Setup {
        u0: unit(g, 1, 2.0),
        model,
        controls,
        time,
    }
}

fn identity(g: GridSpec) -> ControlOperator {
    ControlOperator::identity(g)
}

fn low_modes(g: GridSpec) -> ControlOperator {
    ControlOperator::low_modes(g, 2)
}

fn region(g: GridSpec) -> ControlOperator {
    ControlOperator::region_from_fn(g, |x, y| if x.sin() * y.cos() > 0.0 { 1.0 } else { 0.25 }).unwrap()
}

fn run_forward(s: &Setup) -> Trajectory {
    solve_forward(&s.u0, &s.model, &s.controls, s.time).unwrap().0
}

#[test]
fn tangent_about_rest_is_heat_flow() {
    let g = grid(16);
    for r in [Exponent::Two, Exponent::Three] {
        let params = CbfParams::new(0.1, 0.2, 0.8, r).unwrap();
        let model = Model::unforced(params, g);
        let time = TimeGrid::new(0.5, 0.05).unwrap();
        let (traj, _) = solve_forward(&SpectralVecField::zeros(g), &model, &[], time).unwrap();
        let run = StateRun::new(&model, &[], &traj);
        let w0 = single_mode(g);
        let rate = params.mu * 5.0 + params.alpha;
        solve_linearized_observed(&run, &w0, &[], |n, w| {
            let exact = w0.scaled((-rate * time.time(n)).exp());
            assert!(w.distance_h(&exact) <= 1e-14 * w0.norm_h());
        })
        .unwrap();

        let spec = AdjointSpec {
            terminal: w0.clone(),
            rhs: AdjointRhs::Zero,
        };
        let p = solve_adjoint(&run, &spec).unwrap();
        for n in 0..=time.steps() {
            let exact = w0.scaled((-rate * (time.horizon() - time.time(n))).exp());
            assert!(p.at(n).distance_h(&exact) <= 1e-14 * w0.norm_h());
        }
        assert!(p.initial.distance_h(p.at(0)) <= 1e-14);
    }
}

#[test]
fn zero_inputs_give_zero_solutions() {
    let s = setup(Exponent::Three, identity, 16);
    let traj = run_forward(&s);
    let run = StateRun::new(&s.model, &s.controls, &traj);
    let zero = SpectralVecField::zeros(grid(16));
    let w = solve_linearized(&run, &zero, &[]).unwrap();
    assert!(w.stored().iter().all(|(_, f)| f.is_zero()));
    let spec = AdjointSpec {
        terminal: zero.clone(),
        rhs: AdjointRhs::Zero,
    };
    let p = solve_adjoint(&run, &spec).unwrap();
    assert!(p.states.iter().all(|f| f.is_zero()) && p.initial.is_zero());
    assert_eq!(duality_check(&run, &zero, &[], &spec).unwrap(), 0.0);
}

#[test]
fn tangent_solution_is_linear() {
    let s = setup(Exponent::Three, region, 16);
    let g = grid(16);
    let traj = run_forward(&s);
    let run = StateRun::new(&s.model, &s.controls, &traj);
    let n = s.time.steps() + 1;
    let (w0, w1) = (unit(g, 10, 1.0), unit(g, 11, 1.0));
    let (g0, g1) = (series(g, 100, n, 1.0), series(g, 200, n, 1.0));
    let (a, b) = (0.7, -1.9);
    let mix_w = &w0.scaled(a) + &w1.scaled(b);
    let mix_g: Vec<_> = g0.iter().zip(&g1).map(|(x, y)| &x.scaled(a) + &y.scaled(b)).collect();
    let z0 = solve_linearized(&run, &w0, &g0).unwrap();
    let z1 = solve_linearized(&run, &w1, &g1).unwrap();
    let zm = solve_linearized(&run, &mix_w, &mix_g).unwrap();
    for ((m, x), y) in zm.stored().iter().zip(z0.stored()).zip(z1.stored()) {
        let combo = &x.1.scaled(a) + &y.1.scaled(b);
        assert!(m.1.distance_h(&combo) <= 1e-11 * combo.norm_h().max(1.0));
    }
}

#[test]
fn discrete_duality_holds_to_round_off() {
    let controls: [fn(GridSpec) -> ControlOperator; 3] = [identity, low_modes, region];
    for r in [Exponent::One, Exponent::Two, Exponent::Three] {
        for (k, control) in controls.iter().enumerate() {
            let s = setup(r, *control, 16);
            let g = grid(16);
            let traj = run_forward(&s);
            let run = StateRun::new(&s.model, &s.controls, &traj);
            let n = s.time.steps() + 1;
            let seed = 1000 * k as u64 + r.value() as u64;
            let spec = AdjointSpec {
                terminal: unit(g, seed + 1, 1.0),
                rhs: AdjointRhs::Series(series(g, seed + 10, n, 1.0)),
            };
            let res = duality_check(&run, &unit(g, seed + 2, 1.0), &series(g, seed + 50, n, 1.0), &spec).unwrap();
            assert!(res <= 1e-11, "r={r:?} control {k}: {res:e}");
        }
    }
}

#[test]
fn duality_with_tracking_rhs() {
    let s = setup(Exponent::Three, identity, 16);
    let g = grid(16);
    let traj = run_forward(&s);
    let run = StateRun::new(&s.model, &s.controls, &traj);
    let spec = AdjointSpec {
        terminal: unit(g, 3, 1.0),
        rhs: AdjointRhs::Tracking {
            track_weight: 0.5,
            target: FieldSeries::Constant(unit(g, 4, 1.0)),
            enstrophy_weight: 0.5,
        },
    };
    let res = duality_check(&run, &unit(g, 5, 1.0), &series(g, 60, s.time.steps() + 1, 1.0), &spec).unwrap();
    assert!(res <= 1e-11, "{res:e}");
}

#[test]
fn energy_bounds_hold() {
    let s = setup(Exponent::Three, identity, 16);
    let g = grid(16);
    let traj = run_forward(&s);
    let run = StateRun::new(&s.model, &s.controls, &traj);
    let n = s.time.steps() + 1;
    let src = series(g, 70, n, 1.0);
    assert!(linearized_energy_margin(&run, &unit(g, 6, 1.0), &src).unwrap() >= -1e-6);
    let spec = AdjointSpec {
        terminal: unit(g, 7, 1.0),
        rhs: AdjointRhs::Series(series(g, 80, n, 1.0)),
    };
    let p = solve_adjoint(&run, &spec).unwrap();
    assert!(adjoint_bound_margin(&run, &spec, &p).unwrap() >= -1e-6);
}

#[test]
fn adjoint_converges_to_continuous_solution() {
    // About the rest state the adjoint of a single mode with constant h is
    // p(t) = e^{-c(T-t)} p_T + (1 - e^{-c(T-t)})/c · h.
    let g = grid(16);
    let params = CbfParams::new(0.1, 0.2, 0.8, Exponent::Three).unwrap();
    let model = Model::unforced(params, g);
    let mode = single_mode(g);
    let c = params.mu * 5.0 + params.alpha;
    let horizon = 1.0;
    let mut errs = Vec::new();
    let dts = [0.1, 0.05, 0.025];
    for &dt in &dts {
        let time = TimeGrid::new(horizon, dt).unwrap();
        let (traj, _) = solve_forward(&SpectralVecField::zeros(g), &model, &[], time).unwrap();
        let run = StateRun::new(&model, &[], &traj);
        let spec = AdjointSpec {
            terminal: mode.clone(),
            rhs: AdjointRhs::Series(vec![mode.scaled(3.0); time.steps() + 1]),
        };
        let p = solve_adjoint(&run, &spec).unwrap();
        let mid = time.steps() / 2;
        let s = horizon - time.time(mid);
        let decay = (-c * s).exp();
        let exact = &mode.scaled(decay) + &mode.scaled(3.0 * (1.0 - decay) / c);
        errs.push(p.at(mid).distance_h(&exact) / exact.norm_h());
    }
    let slope = cbf_core::stats::loglog_slope(&dts, &errs);
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}, errors {errs:?}");
}

#[test]
fn gateaux_remainder_vanishes_linearly() {
    for r in [Exponent::Two, Exponent::Three] {
        let s = setup(r, identity, 32);
        let g = grid(32);
        let time = TimeGrid::new(0.1, 1e-2).unwrap();
        let base = &s.controls[..=time.steps()];
        let dir = series(g, 300, time.steps() + 1, 1.0);
        let report = gateaux_check(&s.u0, &s.model, base, &dir, time, &[1e-1, 5e-2, 2.5e-2, 1.25e-2]).unwrap();
        assert!(report.slope() >= 0.9, "r={r:?}: {report:?}");

        let zero = vec![SpectralVecField::zeros(g); time.steps() + 1];
        let report = gateaux_check(&s.u0, &s.model, base, &zero, time, &[1e-1, 5e-2, 2.5e-2]).unwrap();
        assert!(report.errors.iter().all(|&e| e == 0.0));
    }
}

#[test]
fn gateaux_check_validates_step_sizes() {
    let s = setup(Exponent::Three, identity, 16);
    let dir = vec![SpectralVecField::zeros(grid(16)); s.time.steps() + 1];
    assert!(gateaux_check(&s.u0, &s.model, &s.controls, &dir, s.time, &[0.1, 0.2, 0.05]).is_err());
    assert!(gateaux_check(&s.u0, &s.model, &s.controls, &dir, s.time, &[0.1, 0.05]).is_err());
}

#[test]
fn foreign_trajectory_is_detected() {
    let s = setup(Exponent::Three, identity, 16);
    let traj = run_forward(&s);
    let other = Model::unforced(CbfParams::new(0.2, 0.2, 0.8, Exponent::Three).unwrap(), grid(16));
    let run = StateRun::new(&other, &s.controls, &traj);
    let err = solve_linearized(&run, &unit(grid(16), 1, 1.0), &[]).unwrap_err();
    assert!(matches!(err, CbfError::Precondition(_)));
}
