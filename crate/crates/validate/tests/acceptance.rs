//! Runs every acceptance criterion and prints one line per criterion.
//!
//! `BSIM_CRITERIA=3,7` restricts the run to the listed criteria and
//! `BSIM_VERBOSE=1` also prints every metric.

use std::process::ExitCode;

use bsim_validate::{run_criterion, SuiteConfig, CRITERIA};

fn main() -> ExitCode {
    let selected: Vec<u8> = match std::env::var("BSIM_CRITERIA") {
        Ok(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        Err(_) => CRITERIA.to_vec(),
    };
    let verbose = std::env::var_os("BSIM_VERBOSE").is_some();
    let cfg = SuiteConfig::default();
    let mut failed = 0;
    for id in selected {
        let rep = run_criterion(id, &cfg);
        println!("criterion {id}: {}", if rep.passed { "PASS" } else { "FAIL" });
        println!("  {rep}");
        for d in &rep.details {
            println!("    {d}");
        }
        if verbose {
            for (k, v) in &rep.metrics {
                println!("    {k} = {v}");
            }
        }
        if !rep.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
