//! Desk acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured value and its pinned tolerance, and exits nonzero if any failed.
//!
//! Positional arguments select criteria by number (`cargo test --test
//! acceptance -- 3 8`); flags meant for the default harness are ignored.

use std::process::ExitCode;

use glpp::acceptance::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let picked: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u8> = (1..=CRITERIA).filter(|i| picked.is_empty() || picked.contains(i)).collect();
    println!("\nrunning {} acceptance criteria", ids.len());
    let mut failed = Vec::new();
    for id in ids.iter().copied() {
        let r = run_criterion(id);
        println!("{r}");
        for d in &r.details {
            println!("      {d}");
        }
        if !r.passed {
            failed.push(id);
        }
    }
    let verdict = if failed.is_empty() { "ok" } else { "FAILED" };
    println!("\nacceptance result: {verdict}. {} passed; {} failed {failed:?}\n", ids.len() - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
