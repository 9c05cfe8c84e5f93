//! Runs every acceptance criterion at its stated tolerance and budget and
//! prints one PASS/FAIL line per criterion.

use semistab::verify::{run_battery, VerifyOptions};

/// Criteria whose targets are unattainable as stated; see the ledger.
/// They must stay red, failing only on the listed checks.
const KNOWN_RED: &[(u32, &str)] = &[(6, "band of ||T(t)||_{X_tau -> X}")];

#[test]
fn acceptance_criteria() {
    let results = run_battery(&VerifyOptions::default());
    assert_eq!(results.len(), 10);
    let mut unexpected = Vec::new();
    for r in &results {
        println!("{}", r.line());
        match KNOWN_RED.iter().find(|k| k.0 == r.id) {
            Some(&(_, check)) => {
                let failures = r.failures();
                let only_known = r.error.is_none()
                    && r.within_budget()
                    && !failures.is_empty()
                    && failures.iter().all(|f| f.case.starts_with(check));
                if !only_known {
                    unexpected.push(format!("criterion {} changed state", r.id));
                }
            }
            None => {
                if !r.passed() {
                    unexpected.push(format!("criterion {} failed", r.id));
                }
            }
        }
    }
    assert!(unexpected.is_empty(), "{unexpected:?}");
}

#[test]
fn injected_exponent_error_is_caught() {
    let opts = VerifyOptions {
        only: Some("4,5".into()),
        exponent_offset: 0.2,
        ..Default::default()
    };
    for r in run_battery(&opts) {
        println!("{}", r.line());
        assert!(!r.checks_passed(), "criterion {} missed a shifted exponent", r.id);
    }
}
