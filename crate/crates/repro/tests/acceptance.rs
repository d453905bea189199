//! Runs every acceptance criterion and prints one PASS/FAIL line each,
//! followed by the individual checks. Exits non-zero if any criterion fails.
//!
//! `MMLINK_WORKERS` sets the worker count of the Monte-Carlo criteria.

use std::process::ExitCode;

use mmlink_repro::*;

fn report(o: &Outcome) {
    println!(
        "{} criterion {}: {} [{:.1} s]",
        if o.passed { "PASS" } else { "FAIL" },
        o.id,
        o.title,
        o.elapsed.as_secs_f64()
    );
    for d in &o.details {
        println!("       {d}");
    }
}

fn main() -> ExitCode {
    let workers = std::env::var("MMLINK_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let mut outcomes = Vec::new();
    let mut run = |o: Outcome| {
        report(&o);
        outcomes.push(o);
    };
    run(criterion_1_math_oracles());
    run(criterion_2_jakes());
    run(criterion_3_pilot_goldens());
    run(criterion_4_static_trend(workers));
    run(criterion_5_high_kappa(workers));
    let (dynamic, t) = dynamic_sweep(workers);
    run(criterion_6_nlos_crossover(&dynamic, t));
    run(criterion_7_los_robustness(&dynamic, t));
    run(criterion_8_determinism());
    run(criterion_9_perfect_closed_form());

    println!();
    for o in &outcomes {
        println!("{} {}. {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} criteria passed", outcomes.len());
    if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
