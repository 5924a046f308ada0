//! Acceptance run: one PASS/FAIL line per criterion, each under its time
//! limit. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

#[path = "../../core/tests/support/scenarios.rs"]
mod scenarios;

#[path = "../../core/tests/support/criteria.rs"]
mod criteria;

#[path = "../../backend/tests/support/contract.rs"]
mod contract;

type Check = Result<String, String>;

fn runtime_semantics() -> Check {
    let (n, bad, elapsed) = scenarios::check_all();
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    if n != 50 {
        return Err(format!("{n} scenarios, expected 50"));
    }
    let reasons = scenarios::coverage().len();
    if reasons != 6 {
        return Err(format!("only {reasons} of 6 bottom reasons exercised"));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{n} scenarios exact, all 6 bottom reasons, {elapsed:.2?}"))
}

fn recursive_tm() -> Check {
    let parts = [criteria::rtm_equivalence()?, criteria::rtm_linear_memo()?, criteria::rtm_unmemoized_growth()?];
    Ok(parts.join(" | "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 8] = [
        ("runtime semantics", Duration::from_secs(1), runtime_semantics),
        ("recursive TM equivalence", Duration::from_secs(300), recursive_tm),
        ("ATM equivalence", Duration::from_secs(120), criteria::atm_equivalence),
        ("summarizer", Duration::from_secs(120), criteria::summarizer),
        ("SAT soundness", Duration::from_secs(180), || criteria::sat_soundness(100)),
        ("band trend", Duration::from_secs(180), || criteria::band_trend(100)),
        ("scaffolds", Duration::from_secs(60), criteria::scaffolds),
        ("backend contract", Duration::from_secs(30), contract::contract),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > limit => Err(format!("{msg}; took {took:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {name} ({took:.1?}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} ({took:.1?}): {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
