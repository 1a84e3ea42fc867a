use std::path::Path;

use cbf_cli::fieldfile::{load_fields, load_trajectory, save_fields, save_physical, save_trajectory, HEADER_LEN};
use cbf_cli::{run_cli, CliError, RunConfig};
use cbf_core::forward::{solve_forward, Model, TimeGrid};
use cbf_core::operators::{CbfParams, Exponent};
use cbf_core::spectral::{random_divfree_field, DealiasRule, GridSpec};

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["cbf"];
    argv.extend_from_slice(args);
    run_cli(argv)
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn sample_trajectory() -> cbf_core::forward::Trajectory {
    let g = GridSpec::periodic(16, DealiasRule::OneHalf).unwrap();
    let params = CbfParams::new(0.1, 0.1, 0.5, Exponent::Three).unwrap();
    let u0 = random_divfree_field(g, 4, 1.5);
    solve_forward(&u0, &Model::unforced(params, g), &[], TimeGrid::new(0.25, 1e-2).unwrap())
        .unwrap()
        .0
}

#[test]
fn trajectory_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.cbf");
    let traj = sample_trajectory();
    save_trajectory(&path, &traj).unwrap();
    let back = load_trajectory(&path).unwrap();
    assert_eq!(back.stored().len(), traj.stored().len());
    for ((na, a), (nb, b)) in traj.stored().iter().zip(back.stored()) {
        assert_eq!(na, nb);
        for c in 0..2 {
            for (x, y) in a.component(c).iter().zip(b.component(c)) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        assert!(b.satisfies_invariants(1e-12));
    }
    assert_eq!(back.dt(), traj.dt());
    assert_eq!(back.steps(), traj.steps());
}

#[test]
fn physical_files_load_as_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.cbf");
    let traj = sample_trajectory();
    let u = traj.final_state();
    save_physical(&path, &[u.to_physical()], 0.01, 1, 0).unwrap();
    let file = load_fields(&path).unwrap();
    assert!(!file.header.spectral);
    assert!(file.fields[0].distance_h(u) <= 1e-13 * u.norm_h());
}

#[test]
fn corrupted_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.cbf");
    save_trajectory(&path, &sample_trajectory()).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    let mut bad = bytes.clone();
    bad[0] = b'X';
    std::fs::write(&path, &bad).unwrap();
    let err = load_fields(&path).unwrap_err();
    assert!(matches!(err, CliError::Format { .. }) && err.to_string().contains("magic"), "{err}");

    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    let err = load_fields(&path).unwrap_err();
    assert!(err.to_string().contains("payload"), "{err}");

    std::fs::write(&path, &bytes[..HEADER_LEN - 1]).unwrap();
    assert!(load_fields(&path).is_err());

    let mut bad = bytes.clone();
    bad[4] = 9;
    std::fs::write(&path, &bad).unwrap();
    assert!(load_fields(&path).unwrap_err().to_string().contains("version"));
}

#[test]
fn save_requires_fields() {
    let dir = tempfile::tempdir().unwrap();
    assert!(save_fields(&dir.path().join("e.cbf"), &[], 0.1, 1, 1).is_err());
}

#[test]
fn usage_and_config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["simulate", "--bogus-flag"]), 2);
    for text in [
        "[params]\nmu = -1.0\n",
        "[params]\nr = 4\n",
        "[time]\nhorizon = 0.25\ndt = 0.03\n",
        "[grid]\nn = 7\n",
        "unknown_key = 1\n",
        "[cost.weights]\ncontrol = 0.0\n",
        "not toml at all [",
    ] {
        let cfg = write_config(dir.path(), text);
        assert_eq!(run(&["simulate", "--config", &cfg, "--out", out]), 2, "{text}");
    }
    assert!(RunConfig::parse("[params]\nmu = 0.2\n").is_ok());
}

#[test]
fn blowup_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[params]\nmu = 0.01\nbeta = 5.0\n[time]\nhorizon = 5.0\ndt = 0.5\n\
         [initial]\nkind = \"random\"\nseed = 1\ndecay = 1.0\nnorm = 1e4\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]), 3);
}

#[test]
fn simulate_decay_benchmark_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[params]\nmu = 0.3\nalpha = 0.1\nbeta = 0.0\n[time]\nhorizon = 1.0\ndt = 0.01\n\
         [initial]\nkind = \"shear\"\namplitude = 1.5\nwavenumber = 1\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let mut reader = csv::Reader::from_path(out.join("energy.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["t", "kinetic", "viscous", "darcy", "forchheimer", "work_f", "work_DU", "equality_residual"]
    );
    let mut rows = 0;
    let mut e0 = None;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let kinetic: f64 = rec[1].parse().unwrap();
        let e0 = *e0.get_or_insert(kinetic);
        let exact = e0 * (-2.0 * (0.3 + 0.1) * t).exp();
        assert!((kinetic - exact).abs() <= 1e-4 * e0, "t={t}: {kinetic} vs {exact}");
        rows += 1;
    }
    assert_eq!(rows, 101);
    let traj = load_trajectory(&out.join("trajectory.cbf")).unwrap();
    assert_eq!(traj.steps(), 100);
}

#[test]
fn verify_reports_enough_passing_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["verify", "--out", out.to_str().unwrap()]), 0);
    let mut reader = csv::Reader::from_path(out.join("verify.csv")).unwrap();
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 25, "{}", rows.len());
    assert!(rows.iter().all(|r| &r[4] == "true"));
}

#[test]
fn optimize_and_assimilate_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    assert_eq!(run(&["optimize", "--out", out_s, "--seed", "3"]), 0);
    let mut reader = csv::Reader::from_path(out.join("optim.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["iter", "cost", "grad_norm", "step", "pontryagin_residual"]
    );
    let costs: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert!(costs.windows(2).all(|c| c[1] <= c[0]));
    let control = load_fields(&out.join("control.cbf")).unwrap();
    assert_eq!(control.fields.len(), 26);

    assert_eq!(run(&["assimilate", "--out", out_s]), 0);
    let initial = load_fields(&out.join("initial.cbf")).unwrap();
    assert_eq!(initial.fields.len(), 1);
}
