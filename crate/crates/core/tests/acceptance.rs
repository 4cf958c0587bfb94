//! Runs every acceptance criterion and prints one line each. Plain `main` so
//! the lines show up without `--nocapture`.

use std::process::ExitCode;

use restricted_approx::verify::{run_criterion, VerifyConfig};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut failed = Vec::new();
    for id in 1..=10 {
        let Some(r) = run_criterion(id, &cfg) else {
            println!("[FAIL] criterion {id:>2} missing");
            failed.push(id);
            continue;
        };
        println!(
            "[{}] criterion {:>2} {:<32} {:>7.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.seconds,
            r.detail
        );
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: 10 of 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
