//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::process::ExitCode;

use colehopf::acceptance::{render_line, run_all, AcceptanceOptions};

fn main() -> ExitCode {
    let reports = run_all(&AcceptanceOptions::default());
    for r in &reports {
        println!("{}", render_line(r));
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("{passed}/{} criteria passed", reports.len());
    if passed == reports.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
