//! Runs every acceptance criterion and prints one line each.

use std::io::Write;

use ptw_core::verify;

#[test]
fn all_criteria() {
    let reports: Vec<_> = (1..=verify::NAMES.len() as u32).map(verify::run).collect();
    // Written to the raw handle so the lines show up without --nocapture.
    let mut err = std::io::stderr().lock();
    for r in &reports {
        writeln!(err, "{}", r.line()).unwrap();
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
