//! C ABI over `haantjes`: load manifests, run the certification pipeline,
//! and evaluate torsions at a point.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every entry point returns an [`HjStatus`]; on failure
//! the message is available from [`hj_last_error`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use haantjes::concomitants::{haantjes_torsion, nijenhuis_torsion, yano_ako_bracket};
use haantjes::manifest::Manifest;
use haantjes::report::{exit_code, run_checks, CertificateReport, CheckOptions, Verdict};
use haantjes::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HjStatus {
    Ok = 0,
    /// A null pointer, bad UTF-8 or an out-of-range argument.
    InvalidArgument = 1,
    /// The manifest or a flag was rejected (CLI exit code 2).
    ManifestError = 2,
    /// A numerical precondition or computation failed (CLI exit code 1).
    NumericalError = 3,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HjTorsionKind {
    Nijenhuis = 0,
    Haantjes = 1,
    YanoAko = 2,
}

/// A parsed manifest.
pub struct HjManifest {
    inner: Manifest,
}

/// A certificate report with its JSON rendering.
pub struct HjReport {
    inner: CertificateReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HjStatus, msg: String) -> HjStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> HjStatus {
    let status = match exit_code(&e) {
        2 => HjStatus::ManifestError,
        1 => HjStatus::NumericalError,
        _ => HjStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> HjStatus) -> HjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HjStatus::Internal, "internal panic".into()),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HjStatus> {
    if p.is_null() {
        return Err(fail(HjStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(HjStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Load a manifest from a file path or packaged scenario name.
///
/// # Safety
/// `path_or_name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hj_manifest_load(path_or_name: *const c_char, out: *mut *mut HjManifest) -> HjStatus {
    guard(|| {
        if out.is_null() {
            return fail(HjStatus::InvalidArgument, "out is null".into());
        }
        let name = match str_arg(path_or_name, "path_or_name") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match Manifest::load(name) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(HjManifest { inner: m }));
                HjStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parse manifest TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hj_manifest_parse(text: *const c_char, out: *mut *mut HjManifest) -> HjStatus {
    guard(|| {
        if out.is_null() {
            return fail(HjStatus::InvalidArgument, "out is null".into());
        }
        let text = match str_arg(text, "text") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match Manifest::parse(text, "inline") {
            Ok(m) => {
                *out = Box::into_raw(Box::new(HjManifest { inner: m }));
                HjStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Chart dimension, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hj_manifest_dim(m: *const HjManifest) -> usize {
    m.as_ref().map_or(0, |m| m.inner.chart.dim())
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hj_manifest_free(m: *mut HjManifest) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Run the manifest's checks. `points`, `seed` and `tol` override the
/// manifest when positive (seed: when `use_seed` is nonzero).
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hj_check(
    m: *const HjManifest,
    points: usize,
    use_seed: i32,
    seed: u64,
    tol: f64,
    out: *mut *mut HjReport,
) -> HjStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return fail(HjStatus::InvalidArgument, "manifest handle is null".into());
        };
        if out.is_null() {
            return fail(HjStatus::InvalidArgument, "out is null".into());
        }
        let opts = CheckOptions {
            points: (points > 0).then_some(points),
            seed: (use_seed != 0).then_some(seed),
            tol: (tol > 0.0).then_some(tol),
            only: None,
            timing: false,
        };
        match run_checks(&m.inner, &opts) {
            Ok(r) => {
                let json = CString::new(r.to_json()).expect("JSON has no NUL");
                *out = Box::into_raw(Box::new(HjReport { inner: r, json }));
                HjStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// 1 when the overall verdict is PASS, 0 otherwise (also for null).
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hj_report_passed(r: *const HjReport) -> i32 {
    r.as_ref().map_or(0, |r| (r.inner.overall == Verdict::Pass) as i32)
}

/// JSON text of the report, owned by the handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hj_report_json(r: *const HjReport) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hj_report_free(r: *mut HjReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Components of a torsion of field `field` at `point` (length `dim`),
/// written to `out` in row-major order: `n³` values `T^i_{jl}` at
/// `(i*n + j)*n + l` for Nijenhuis and Haantjes, `n⁵` values for Yano-Ako.
/// `written` receives the number of components, also when `out` is too small.
///
/// # Safety
/// `m` must be a live handle, `field` a NUL-terminated string, `point` valid
/// for `dim` reads, `out` valid for `cap` writes (or null with `cap == 0`),
/// and `written` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hj_torsion(
    m: *const HjManifest,
    field: *const c_char,
    kind: HjTorsionKind,
    point: *const f64,
    dim: usize,
    enforce_pre: i32,
    tol: f64,
    out: *mut f64,
    cap: usize,
    written: *mut usize,
) -> HjStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return fail(HjStatus::InvalidArgument, "manifest handle is null".into());
        };
        let name = match str_arg(field, "field") {
            Ok(s) => s,
            Err(s) => return s,
        };
        if point.is_null() || written.is_null() || (out.is_null() && cap > 0) {
            return fail(HjStatus::InvalidArgument, "null buffer".into());
        }
        let n = m.inner.chart.dim();
        if dim != n {
            return fail(HjStatus::InvalidArgument, format!("point has {dim} coordinates, chart has {n}"));
        }
        let p = std::slice::from_raw_parts(point, dim);
        let f = match m.inner.field(name) {
            Ok(f) => f,
            Err(e) => return from_error(e),
        };
        let tol = if tol > 0.0 { tol } else { haantjes::report::DEFAULT_TOL };
        let comps = match kind {
            HjTorsionKind::Nijenhuis => nijenhuis_torsion(f, p).map(|t| t.comps),
            HjTorsionKind::Haantjes => haantjes_torsion(f, p).map(|t| t.comps),
            HjTorsionKind::YanoAko => yano_ako_bracket(f, p, enforce_pre != 0, tol).map(|v| v.comps),
        };
        let comps = match comps {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        *written = comps.len();
        if cap < comps.len() {
            return fail(HjStatus::BufferTooSmall, format!("need {} values, buffer holds {cap}", comps.len()));
        }
        std::slice::from_raw_parts_mut(out, comps.len()).copy_from_slice(&comps);
        HjStatus::Ok
    })
}
