//! Runs every acceptance criterion and prints one PASS/FAIL line for each.
//! Built without the test harness so the lines are never captured.
//!
//! Checks listed in `KNOWN_FAILURES` are expected to fail. The test asserts
//! that every other check passes and that each known failure still fails,
//! so a silent change in either direction is caught.
use pekeris_refocus::validation::{criteria, is_known_failure, KNOWN_FAILURES};

fn main() {
    let mut unexpected = Vec::new();
    let mut seen_known = Vec::new();
    for (id, run) in criteria() {
        let report = run();
        println!("{}", report.line());
        for c in &report.checks {
            let known = is_known_failure(id, &c.name);
            if !c.passed && !known {
                unexpected.push(format!("criterion {id}: {} ({})", c.name, c.detail));
            }
            if known {
                if c.passed {
                    unexpected.push(format!("criterion {id}: known failure `{}` now passes ({})", c.name, c.detail));
                } else {
                    println!("    expected failure: {} ({})", c.name, c.detail);
                }
                seen_known.push((id, c.name.clone()));
            }
        }
    }
    for (id, name, why) in KNOWN_FAILURES {
        if !seen_known.iter().any(|(i, n)| i == id && n == name) {
            unexpected.push(format!("criterion {id}: known failure `{name}` was not evaluated"));
        }
        println!("known failure, criterion {id}: {name}: {why}");
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected results:\n{}", unexpected.join("\n"));
        std::process::exit(1);
    }
    println!("acceptance: all checks outside the known failures pass");
}
