use std::ffi::{CStr, CString};
use std::ptr;

use lpi_ffi::*;

const FIG1: &str = "int i = 0;\nint j = 0;\nwhile (i < 10) { i++; }\nwhile (j < 10) { j++; }\nassert(j == 10);\n";

fn last_error() -> String {
    let p = lpi_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn analyze(src: &str, opts: *const LpiOptions) -> (LpiStatus, *mut LpiAnalysis) {
    let src = CString::new(src).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { lpi_analyze(src.as_ptr(), opts, &mut out) };
    (status, out)
}

#[test]
fn analyze_with_defaults() {
    let (status, a) = analyze(FIG1, ptr::null());
    assert_eq!(status, LpiStatus::Ok);
    unsafe {
        assert!(lpi_analysis_all_proved(a));
        assert_eq!(lpi_analysis_assertion_count(a), 1);
        let (mut line, mut proved) = (0u32, false);
        assert_eq!(lpi_analysis_assertion(a, 0, &mut line, &mut proved), LpiStatus::Ok);
        assert_eq!((line, proved), (5, true));
        assert_eq!(lpi_analysis_assertion(a, 1, &mut line, &mut proved), LpiStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let json = lpi_analysis_json(a);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["assertions"][0]["status"], "proved");
        assert_eq!(v["stats"]["value_determinations"], 2);
        lpi_string_free(json);
        lpi_analysis_free(a);
    }
}

#[test]
fn options_change_the_run() {
    let src = "int x = 0; int y = 0; while (x < 10) { x++; y++; } assert(x == y);";
    let (status, a) = analyze(src, ptr::null());
    assert_eq!(status, LpiStatus::Ok);
    assert!(!unsafe { lpi_analysis_all_proved(a) });
    unsafe { lpi_analysis_free(a) };

    let opts = lpi_options_new();
    unsafe {
        assert_eq!(lpi_options_set_domain(opts, LpiDomain::Octagons), LpiStatus::Ok);
        assert_eq!(lpi_options_set_unroll(opts, 0), LpiStatus::Ok);
        assert_eq!(lpi_options_set_congruence(opts, false), LpiStatus::Ok);
        assert_eq!(lpi_options_set_relaxed(opts, false), LpiStatus::Ok);
        let name = CString::new("syntactic-skip").unwrap();
        assert_eq!(lpi_options_disable_heuristic(opts, name.as_ptr()), LpiStatus::Ok);
        let bad = CString::new("widening").unwrap();
        assert_eq!(lpi_options_disable_heuristic(opts, bad.as_ptr()), LpiStatus::InvalidArgument);
        assert!(last_error().contains("widening"));
    }
    let (status, a) = analyze(src, opts);
    assert_eq!(status, LpiStatus::Ok);
    assert!(unsafe { lpi_analysis_all_proved(a) });
    unsafe {
        lpi_analysis_free(a);
        lpi_options_free(opts);
    }
}

#[test]
fn refinement_through_options() {
    let opts = lpi_options_new();
    unsafe { lpi_options_set_refine(opts, true) };
    let (status, a) = analyze("int x = 0; while (x < 10) { x = x + 2; } assert(x != 11);", opts);
    assert_eq!(status, LpiStatus::Ok);
    unsafe {
        assert!(lpi_analysis_all_proved(a));
        lpi_analysis_free(a);
        lpi_options_free(opts);
    }
}

#[test]
fn errors_are_reported() {
    let (status, a) = analyze("int x = ;", ptr::null());
    assert_eq!(status, LpiStatus::ParseError);
    assert!(a.is_null());
    assert!(last_error().starts_with("1:9"));

    let (status, _) = analyze("x = 1;", ptr::null());
    assert_eq!(status, LpiStatus::ParseError);
    assert!(last_error().contains("undeclared"));

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { lpi_analyze(ptr::null(), ptr::null(), &mut out) }, LpiStatus::NullPointer);
    let src = CString::new("int x;").unwrap();
    assert_eq!(unsafe { lpi_analyze(src.as_ptr(), ptr::null(), ptr::null_mut()) }, LpiStatus::NullPointer);
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { lpi_analyze(invalid.as_ptr().cast(), ptr::null(), &mut out) }, LpiStatus::InvalidUtf8);
    assert_eq!(unsafe { lpi_options_set_unroll(ptr::null_mut(), 1) }, LpiStatus::NullPointer);
    assert!(unsafe { lpi_analysis_json(ptr::null()) }.is_null());
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        lpi_analysis_free(ptr::null_mut());
        lpi_options_free(ptr::null_mut());
        lpi_string_free(ptr::null_mut());
        assert_eq!(lpi_analysis_assertion_count(ptr::null()), 0);
        assert!(!lpi_analysis_all_proved(ptr::null()));
    }
}

#[test]
fn errors_are_per_thread() {
    let (status, _) = analyze("int x = ;", ptr::null());
    assert_eq!(status, LpiStatus::ParseError);
    std::thread::spawn(|| assert!(lpi_last_error().is_null())).join().unwrap();
    assert!(!lpi_last_error().is_null());
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(lpi_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
