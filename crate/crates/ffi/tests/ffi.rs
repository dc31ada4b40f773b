use std::ffi::{CStr, CString};
use std::ptr;

use bvcalc_ffi::*;

fn last_error() -> String {
    let p = bvc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scenario_ids_round_trip() {
    let n = bvc_scenario_count();
    assert!(n >= 10);
    let mut ids = Vec::new();
    for k in 0..n {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { bvc_scenario_id(k, &mut s) }, BvcStatus::Ok);
        ids.push(unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string());
        unsafe { bvc_string_free(s) };
    }
    assert!(ids.iter().any(|i| i == "example1"));
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bvc_scenario_id(n, &mut s) }, BvcStatus::InvalidArgument);
}

#[test]
fn run_report_matches_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let id = CString::new("atom-absorbs-jump").unwrap();
    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut report = ptr::null_mut();
    let st = unsafe { bvc_run_scenario(id.as_ptr(), 16, 64, 1e-6, 0, out_dir.as_ptr(), &mut report) };
    assert_eq!(st, BvcStatus::Ok);
    let mut passed = false;
    assert_eq!(unsafe { bvc_report_passed(report, &mut passed) }, BvcStatus::Ok);
    assert!(passed);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { bvc_report_json(report, &mut json) }, BvcStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    unsafe {
        bvc_string_free(json);
        bvc_report_free(report);
    }
    assert_eq!(text, std::fs::read_to_string(dir.path().join("report.json")).unwrap());
}

#[test]
fn errors_map_to_codes() {
    let id = CString::new("missing").unwrap();
    let mut report = ptr::null_mut();
    let st = unsafe { bvc_run_scenario(id.as_ptr(), 16, 64, 1e-6, 0, ptr::null(), &mut report) };
    assert_eq!(st, BvcStatus::UnknownScenario);
    assert!(report.is_null());
    assert!(last_error().contains("missing"));

    let id = CString::new("example2").unwrap();
    let st = unsafe { bvc_run_scenario(id.as_ptr(), 2, 64, 1e-6, 0, ptr::null(), &mut report) };
    assert_eq!(st, BvcStatus::InvalidArgument);

    let st = unsafe { bvc_run_scenario(ptr::null(), 16, 64, 1e-6, 0, ptr::null(), &mut report) };
    assert_eq!(st, BvcStatus::NullPointer);

    let mut v = 0.0;
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { bvc_oracle_1d(bad.as_ptr(), &mut v) }, BvcStatus::Parse);
}

#[test]
fn oracle_through_the_abi() {
    let case = CString::new(
        r#"{"interval": [0, 1], "breaks": [], "pieces": [[0, 3]], "density_breaks": [],
            "density": [2], "atoms": [], "integrand": "norm", "include_boundary": false}"#,
    )
    .unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { bvc_oracle_1d(case.as_ptr(), &mut v) }, BvcStatus::Ok);
    assert!((v - 3.0).abs() < 1e-10);
}

#[test]
fn integrand_handles() {
    let id = CString::new("area").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { bvc_integrand_new(id.as_ptr(), &mut f) }, BvcStatus::Ok);
    let a = [3.0, 0.0, 0.0, 4.0];
    let mut v = 0.0;
    assert_eq!(unsafe { bvc_integrand_eval(f, 0.0, 0.0, a.as_ptr(), 2, 2, &mut v) }, BvcStatus::Ok);
    assert!((v - 26f64.sqrt()).abs() < 1e-14);
    assert_eq!(unsafe { bvc_integrand_recession(f, 0.0, 0.0, a.as_ptr(), 2, 2, &mut v) }, BvcStatus::Ok);
    assert!((v - 5.0).abs() < 1e-14);
    assert_eq!(unsafe { bvc_integrand_eval(f, 0.0, 0.0, a.as_ptr(), 3, 2, &mut v) }, BvcStatus::InvalidArgument);
    assert_eq!(unsafe { bvc_integrand_eval(f, 0.0, 0.0, ptr::null(), 1, 1, &mut v) }, BvcStatus::NullPointer);
    unsafe { bvc_integrand_free(f) };

    let id = CString::new("cubic").unwrap();
    assert_eq!(unsafe { bvc_integrand_new(id.as_ptr(), &mut f) }, BvcStatus::InvalidArgument);
    assert!(f.is_null());
}

#[test]
fn header_declares_the_abi() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bvcalc.h")).unwrap();
    for name in ["bvc_run_scenario", "bvc_last_error", "bvc_string_free", "BVC_STATUS_PANIC", "typedef struct BvcReport"] {
        assert!(h.contains(name), "{name}");
    }
}
