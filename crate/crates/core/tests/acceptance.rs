//! Release gate. Runs without the libtest harness so that every criterion
//! line reaches the output.

use std::process::ExitCode;
use std::time::Instant;

use linapprox::acceptance::{run, run_all, Config, SemiringKind, Status};

fn main() -> ExitCode {
    let start = Instant::now();
    let results = run_all(&Config::default());
    for r in &results {
        println!("{r}");
    }
    let mut ok = results.iter().all(|r| r.status == Status::Pass);

    // negative control: zeroing one coefficient must be caught
    let corrupted = run(
        6,
        &Config {
            corrupt_coefficient: true,
            ..Config::default()
        },
    );
    println!(
        "negative control (corrupted coefficient) {}",
        if corrupted.status == Status::Fail {
            "detected"
        } else {
            "MISSED"
        }
    );
    ok &= corrupted.status == Status::Fail;

    let boolean = Config {
        semiring: SemiringKind::Boolean,
        ..Config::default()
    };
    let bool_results = run_all(&boolean);
    let summary: Vec<String> = bool_results
        .iter()
        .map(|r| format!("{}:{:?}", r.id, r.status))
        .collect();
    println!("boolean semiring: {}", summary.join(" "));
    ok &= bool_results.iter().all(|r| {
        if r.id == 2 {
            r.status == Status::Skip
        } else {
            r.status == Status::Pass
        }
    });

    println!(
        "acceptance {} in {:.1?}",
        if ok { "passed" } else { "FAILED" },
        start.elapsed()
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
