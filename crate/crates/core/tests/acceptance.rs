//! Acceptance battery: one PASS/FAIL line per criterion, then any table
//! rows. Numeric arguments pick criteria, e.g.
//! `cargo test --test acceptance -- 4 8`.
//!
//! Criteria have wall-time limits, so they run one at a time on the main
//! thread instead of under the parallel test harness.

use std::process::ExitCode;

use qsr_core::suite::{self, SuiteOptions};

fn main() -> ExitCode {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u32> = [1, 2, 3, 4, 5, 6, 7, 8, 9, 11]
        .into_iter()
        .filter(|id| picked.is_empty() || picked.contains(id) || (*id == 9 && picked.contains(&10)))
        .collect();
    let opts = SuiteOptions::default();
    let mut failed = Vec::new();
    for id in ids {
        for r in suite::run_criterion(id, &opts) {
            println!("{}", r.line());
            for row in &r.table {
                println!("    {row}");
            }
            if !r.passed {
                failed.push(r.id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria {failed:?} failed");
        ExitCode::FAILURE
    }
}
