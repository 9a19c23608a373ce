//! `smcmc verify`: the exact finite-state bound checks as a CSV table.

use anyhow::Result;
use smcmc_core::theory::{run_suite, CheckReport};
use smcmc_core::ExecPolicy;

use crate::report::{fmt_f64, Table};

pub fn report_table(reports: &[CheckReport]) -> Table {
    let mut t = Table::new([
        "check",
        "instances",
        "violations",
        "flagged",
        "max_violation",
        "margin_p05",
        "margin_p50",
        "margin_p95",
        "status",
    ]);
    for r in reports {
        t.push(vec![
            r.name.clone(),
            r.instances.to_string(),
            r.violations.to_string(),
            r.flagged.to_string(),
            fmt_f64(r.max_violation),
            fmt_f64(r.margin_p05),
            fmt_f64(r.margin_p50),
            fmt_f64(r.margin_p95),
            if r.passed() { "pass" } else { "FAIL" }.to_string(),
        ]);
    }
    t
}

/// Run a suite and return its table and whether every check passed.
pub fn verify(suite: &str, instances: usize, seed: u64, policy: ExecPolicy) -> Result<(Table, bool)> {
    let reports = run_suite(suite, instances, seed, policy)?;
    let passed = reports.iter().all(CheckReport::passed);
    Ok((report_table(&reports), passed))
}
