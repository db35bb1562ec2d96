//! Acceptance suite: prints one pass/fail line per criterion.
//!
//! Criterion 11 additionally requires the `selftest` subcommand of the
//! binary to exit 0. Criteria listed in `DOCUMENTED_FAILURES` are reported
//! as they come out; a failure there is expected and does not fail this
//! target, but an unexpected pass is reported too.

use std::process::{Command, ExitCode};

use shiftsign_lab::acceptance::{self, Criterion, CRITERIA};

/// Criteria that cannot be met as stated; see the README.
const DOCUMENTED_FAILURES: &[usize] = &[8, 11];

fn selftest_exit_code() -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_shiftsign"))
        .arg("selftest")
        .output()
        .ok()
        .and_then(|o| o.status.code())
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for id in 1..=CRITERIA {
        let mut c = acceptance::run(id);
        if id == 11 {
            let code = selftest_exit_code();
            c = Criterion {
                passed: c.passed && code == Some(0),
                detail: format!("{}; selftest exit code {code:?}", c.detail),
                ..c
            };
        }
        let documented = DOCUMENTED_FAILURES.contains(&id);
        let note = match (c.passed, documented) {
            (false, true) => "  (documented failure)",
            (true, true) => "  (documented failure now passes)",
            _ => "",
        };
        println!("{c}{note}");
        if !c.passed && !documented {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
