//! Acceptance criteria 1–10, one PASS/FAIL line each.

use std::io::Write;

use volpres_cli::run_checks;

#[test]
fn acceptance() {
    let outcomes = run_checks(1);
    // written to the raw handle so the lines show up without --nocapture
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for o in &outcomes {
        writeln!(out, "{o}").unwrap();
    }
    out.flush().unwrap();
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert_eq!(outcomes.len(), 10);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
