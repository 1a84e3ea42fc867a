use std::path::Path;

use cbf_core::control::OptimReport;
use cbf_core::forward::EnergyLedger;
use cbf_core::verify::CheckResult;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct OptimRow {
    iter: usize,
    cost: f64,
    grad_norm: f64,
    step: f64,
    pontryagin_residual: f64,
}

fn writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Columns `t, kinetic, viscous, darcy, forchheimer, work_f, work_DU, equality_residual`.
pub fn write_energy_csv(path: &Path, ledger: &EnergyLedger) -> CliResult<()> {
    let mut w = writer(path)?;
    for row in &ledger.rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Columns `iter, cost, grad_norm, step, pontryagin_residual`.
pub fn write_optim_csv(path: &Path, report: &OptimReport) -> CliResult<()> {
    let mut w = writer(path)?;
    for k in 0..report.costs.len() {
        w.serialize(OptimRow {
            iter: k,
            cost: report.costs[k],
            grad_norm: report.grad_norms[k],
            step: report.steps[k],
            pontryagin_residual: report.pontryagin_residual[k],
        })?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_checks_csv(path: &Path, checks: &[CheckResult]) -> CliResult<()> {
    let mut w = writer(path)?;
    for c in checks {
        w.serialize(c)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Fixed-width pass/fail table.
pub fn format_checks(checks: &[CheckResult]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:<width$}  {:>12}  {:>10}  result\n", "check", "margin", "tolerance");
    for c in checks {
        s.push_str(&format!(
            "{:<width$}  {:>12.4e}  {:>10.1e}  {}\n",
            c.name,
            c.margin,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        ));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    s.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    s
}
