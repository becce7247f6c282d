//! Acceptance criteria at full scale. One PASS/FAIL line per criterion,
//! followed by the measured quantities. Runs without the libtest harness so
//! the lines are never captured.

use std::process::ExitCode;

use omthermo::selftest::{run_all, Scale};

fn main() -> ExitCode {
    let verdicts = run_all(Scale::Full);
    for v in &verdicts {
        print!("{v}");
    }
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", verdicts.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
