use haantjes::manifest::{Manifest, SCENARIOS};
use haantjes::report::{run_checks, CheckOptions, Verdict, CHECK_IDS};

fn opts() -> CheckOptions {
    CheckOptions { points: Some(30), seed: Some(7), ..Default::default() }
}

#[test]
fn every_scenario_reproduces_its_expectations() {
    for (name, _) in SCENARIOS {
        let m = Manifest::load(name).unwrap();
        assert!(!m.checks.expect.is_empty(), "{name} has no expectations");
        let r = run_checks(&m, &opts()).unwrap();
        let bad = r.expectation_mismatches(&m.checks.expect);
        assert!(bad.is_empty(), "{name}: {bad:?}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["a3-frobenius", "perturbed-a3", "weak-2d"] {
        let m = Manifest::load(name).unwrap();
        assert_eq!(run_checks(&m, &opts()).unwrap().to_json(), run_checks(&m, &opts()).unwrap().to_json());
    }
}

#[test]
fn records_follow_canonical_order() {
    let r = run_checks(&Manifest::load("a3-frobenius").unwrap(), &opts()).unwrap();
    let ids: Vec<&str> = r.checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, CHECK_IDS);
}

#[test]
fn only_selects_checks() {
    let m = Manifest::load("a3-frobenius").unwrap();
    let o = CheckOptions { only: Some(vec!["lenard".into(), "commute".into()]), ..opts() };
    let r = run_checks(&m, &o).unwrap();
    let ids: Vec<&str> = r.checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["commute", "lenard"]);
    assert_eq!(r.overall, Verdict::Pass);
}

#[test]
fn failed_prerequisite_skips_dependents() {
    let m = Manifest::load("perturbed-a3").unwrap();
    let o = CheckOptions { only: Some(vec!["square-closed".into(), "potentials".into()]), ..opts() };
    let r = run_checks(&m, &o).unwrap();
    assert_eq!(r.record("square-closed").unwrap().verdict, Verdict::Fail);
    assert_eq!(r.record("potentials").unwrap().verdict, Verdict::Skipped);
    assert_eq!(r.overall, Verdict::Fail);
}

#[test]
fn unknown_check_id_is_rejected() {
    let m = Manifest::load("a3-frobenius").unwrap();
    let o = CheckOptions { only: Some(vec!["nonsense".into()]), ..opts() };
    assert!(run_checks(&m, &o).is_err());
}

#[test]
fn manifest_hash_tracks_source_text() {
    let a = Manifest::load("a3-frobenius").unwrap();
    let b = Manifest::load("scaling").unwrap();
    assert_eq!(a.hash.len(), 64);
    assert_ne!(a.hash, b.hash);
    assert_eq!(a.hash, Manifest::load("a3-frobenius").unwrap().hash);
}
