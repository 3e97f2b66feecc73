//! Acceptance criteria A1–A12, one line per criterion.
//!
//! Runs every criterion by default; pass identifiers to select some, e.g.
//! `cargo test -p dualkit --test acceptance -- A1 A5`. Every tolerance is
//! fixed in `dualkit::verify` and echoed with each check.

use std::process::ExitCode;

use dualkit::verify::{run_criterion, criterion_ids, VerifyOptions};

fn main() -> ExitCode {
    let picked: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let ids: Vec<String> = if picked.is_empty() {
        criterion_ids().into_iter().map(String::from).collect()
    } else {
        picked
    };
    let opts = VerifyOptions::default();
    let mut failed = 0;
    for id in &ids {
        match run_criterion(id, &opts) {
            Ok(report) => {
                println!("{}", report.summary_line());
                for c in report.checks.iter().filter(|c| c.passed) {
                    println!("    ok: {}: {}", c.name, c.detail);
                }
                failed += usize::from(!report.passed);
            }
            Err(e) => {
                println!("FAIL {id} error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", ids.len() - failed, ids.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
