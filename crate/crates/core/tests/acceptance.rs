//! End-to-end acceptance gate. Runs every verification criterion at its
//! stated tolerance and prints one PASS/FAIL line per criterion; the test
//! fails if any criterion does.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use pmc_rotor_core::verify;

#[test]
fn acceptance() {
    let report = verify::run_all();
    for line in report.lines() {
        println!("{line}");
    }
    let failed: Vec<String> = report
        .outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.line())
        .collect();
    assert!(
        report.all_passed(),
        "acceptance criteria failed:\n{}",
        failed.join("\n")
    );
}
