//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! with a failure status if any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use cbf_cli::run_cli;
use cbf_core::verify::{
    adjoint_suite, forward_suite, monotonicity_suite, operator_identity_suite, optimality_suite, twin_suite,
    uniqueness_suite, CheckResult,
};
use cbf_core::Result;

const SEED: u64 = 2024;

fn determinism() -> Result<Vec<CheckResult>> {
    let dir = tempfile::tempdir().expect("temporary directory");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[forcing]\nkind = \"random\"\nseed = 5\ndecay = 2.0\nnorm = 0.5\n").expect("write config");
    let mut checks = Vec::new();
    for (command, file) in [("simulate", "energy.csv"), ("optimize", "optim.csv"), ("assimilate", "optim.csv")] {
        let outputs: Vec<Vec<u8>> = ["a", "b"]
            .iter()
            .map(|run| {
                let out = dir.path().join(format!("{command}-{run}"));
                let code = run_cli([
                    "cbf",
                    command,
                    "--config",
                    cfg.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                    "--seed",
                    "11",
                ]);
                assert_eq!(code, 0, "{command} failed");
                read(&out.join(file))
            })
            .collect();
        let identical = !outputs[0].is_empty() && outputs[0] == outputs[1];
        checks.push(CheckResult::at_most(
            format!("{command} CSV byte-identical"),
            if identical { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    Ok(checks)
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

fn main() -> ExitCode {
    type Suite = Box<dyn Fn() -> Result<Vec<CheckResult>>>;
    let criteria: Vec<(&str, Suite)> = vec![
        ("1 operator identities (200 fields each)", Box::new(|| operator_identity_suite(32, SEED, 200))),
        ("2 monotonicity (500 pairs)", Box::new(|| monotonicity_suite(32, SEED, 500))),
        ("3 forward convergence and energy bounds", Box::new(|| forward_suite(32))),
        ("4 adjoint exactness and FD gradients", Box::new(|| adjoint_suite(SEED, 50, 10))),
        ("5 optimality conditions", Box::new(|| optimality_suite(SEED, 20))),
        ("6 twin experiment", Box::new(|| twin_suite(SEED))),
        ("7 small-horizon uniqueness", Box::new(|| uniqueness_suite(SEED))),
        ("8 determinism", Box::new(determinism)),
    ];
    let mut all = true;
    for (name, suite) in criteria {
        let clock = Instant::now();
        let (passed, detail) = match suite() {
            Ok(checks) => {
                let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
                let detail = if failed.is_empty() {
                    format!("{} checks", checks.len())
                } else {
                    failed
                        .iter()
                        .map(|c| format!("{}: margin {:e}, tolerance {:e}", c.name, c.margin, c.tolerance))
                        .collect::<Vec<_>>()
                        .join("; ")
                };
                (failed.is_empty(), detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "criterion {name}: {} ({detail}, {:.1}s)",
            if passed { "PASS" } else { "FAIL" },
            clock.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
