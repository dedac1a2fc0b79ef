use std::ffi::{CStr, CString};
use std::ptr;

use haantjes_ffi::*;

fn load(name: &str) -> *mut HjManifest {
    let mut m = ptr::null_mut();
    let c = CString::new(name).unwrap();
    assert_eq!(unsafe { hj_manifest_load(c.as_ptr(), &mut m) }, HjStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hj_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn check_round_trip_through_handles() {
    let m = load("a3-frobenius");
    assert_eq!(unsafe { hj_manifest_dim(m) }, 3);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hj_check(m, 10, 1, 7, 0.0, &mut r) }, HjStatus::Ok);
    assert_eq!(unsafe { hj_report_passed(r) }, 1);
    let json = unsafe { CStr::from_ptr(hj_report_json(r)) }.to_str().unwrap();
    assert!(json.contains("\"overall\": \"PASS\""));
    assert!(json.contains("\"seed\": 7"));
    unsafe {
        hj_report_free(r);
        hj_manifest_free(m);
    }
}

#[test]
fn failing_scenario_reports_fail() {
    let m = load("perturbed-a3");
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hj_check(m, 10, 0, 0, 0.0, &mut r) }, HjStatus::Ok);
    assert_eq!(unsafe { hj_report_passed(r) }, 0);
    unsafe {
        hj_report_free(r);
        hj_manifest_free(m);
    }
}

#[test]
fn nijenhuis_components_and_buffer_protocol() {
    let m = load("diag-2d");
    let field = CString::new("K2").unwrap();
    let p = [0.0, 1.0];
    let mut written = 0usize;
    let st = unsafe { hj_torsion(m, field.as_ptr(), HjTorsionKind::Nijenhuis, p.as_ptr(), 2, 0, 0.0, ptr::null_mut(), 0, &mut written) };
    assert_eq!(st, HjStatus::BufferTooSmall);
    assert_eq!(written, 8);
    let mut out = vec![0.0; written];
    let st = unsafe { hj_torsion(m, field.as_ptr(), HjTorsionKind::Nijenhuis, p.as_ptr(), 2, 0, 0.0, out.as_mut_ptr(), out.len(), &mut written) };
    assert_eq!(st, HjStatus::Ok);
    // T^1_12 = T^2_12 = 1 at (0, 1)
    assert!((out[1] - 1.0).abs() < 1e-12 && (out[5] - 1.0).abs() < 1e-12);
    assert!((out[2] + 1.0).abs() < 1e-12);
    unsafe { hj_manifest_free(m) };
}

#[test]
fn errors_are_reported_not_panicked() {
    let mut m = ptr::null_mut();
    let bad = CString::new("no-such-scenario").unwrap();
    assert_eq!(unsafe { hj_manifest_load(bad.as_ptr(), &mut m) }, HjStatus::ManifestError);
    assert!(last_error().contains("no-such-scenario"));
    assert_eq!(unsafe { hj_manifest_load(ptr::null(), &mut m) }, HjStatus::InvalidArgument);
    let text = CString::new("[chart]\nlower = [0.0]\nupper = [1.0]\n[fields.A]\nvalence = \"scalar\"\nexpr = \"log(\"\n").unwrap();
    assert_eq!(unsafe { hj_manifest_parse(text.as_ptr(), &mut m) }, HjStatus::ManifestError);
    assert!(last_error().contains("fields.A.expr"));
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hj_check(ptr::null(), 0, 0, 0, 0.0, &mut r) }, HjStatus::InvalidArgument);
    unsafe {
        hj_manifest_free(ptr::null_mut());
        hj_report_free(ptr::null_mut());
    }
}

#[test]
fn non_associative_yano_ako_is_refused() {
    let text = CString::new(NON_ASSOCIATIVE).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hj_manifest_parse(text.as_ptr(), &mut m) }, HjStatus::Ok);
    let field = CString::new("C").unwrap();
    let p = [0.1, 0.2];
    let mut out = vec![0.0; 32];
    let mut written = 0;
    let st = unsafe { hj_torsion(m, field.as_ptr(), HjTorsionKind::YanoAko, p.as_ptr(), 2, 1, 0.0, out.as_mut_ptr(), 32, &mut written) };
    assert_eq!(st, HjStatus::NumericalError);
    assert!(last_error().contains("associativity"));
    unsafe { hj_manifest_free(m) };
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/haantjes.h")).unwrap();
    for sym in ["hj_manifest_load", "hj_check", "hj_torsion", "hj_last_error", "HJ_STATUS_OK", "HjManifest"] {
        assert!(h.contains(sym), "{sym} missing from header");
    }
    let v = unsafe { CStr::from_ptr(hj_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

// C^1_11 = 1 and C^2_22 = 1 with C^1_22 = 1: symmetric, not associative
const NON_ASSOCIATIVE: &str = r#"
[chart]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]

[fields.C]
valence = "(1,2)"
components = { "1.1.1" = "1", "1.1.2" = "0", "1.2.1" = "0", "1.2.2" = "1", "2.1.1" = "0", "2.1.2" = "0", "2.2.1" = "0", "2.2.2" = "1" }
"#;
