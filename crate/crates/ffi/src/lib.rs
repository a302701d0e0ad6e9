//! C interface to the analyzer.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns an [`LpiStatus`];
//! on failure, [`lpi_last_error`] describes the most recent error on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Instant;

use lpi::engine::{refine_ladder, run, AnalysisConfig, IntegerMode, Verdict};
use lpi::report::Report;
use lpi::templates::Preset;
use lpi::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    AnalysisError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpiDomain {
    Intervals = 0,
    Octagons = 1,
    Rich = 2,
}

/// Analysis settings; starts as intervals, exact integers, no unrolling.
pub struct LpiOptions {
    cfg: AnalysisConfig,
    refine: bool,
}

/// A finished analysis.
pub struct LpiAnalysis {
    json: CString,
    assertions: Vec<(u32, bool)>,
    complete: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: LpiStatus, msg: impl Into<String>) -> LpiStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LpiStatus) -> LpiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LpiStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, LpiStatus> {
    if p.is_null() {
        return Err(fail(LpiStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LpiStatus::InvalidUtf8, "string argument is not valid UTF-8"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lpi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lpi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn lpi_options_new() -> *mut LpiOptions {
    Box::into_raw(Box::new(LpiOptions {
        cfg: AnalysisConfig::default(),
        refine: false,
    }))
}

/// # Safety
/// `opts` must be null or a pointer from [`lpi_options_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_free(opts: *mut LpiOptions) {
    if !opts.is_null() {
        drop(Box::from_raw(opts));
    }
}

unsafe fn with_options(opts: *mut LpiOptions, f: impl FnOnce(&mut LpiOptions) -> LpiStatus) -> LpiStatus {
    match opts.as_mut() {
        None => fail(LpiStatus::NullPointer, "null options handle"),
        Some(o) => guard(|| f(o)),
    }
}

/// # Safety
/// `opts` must be a live options handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_set_domain(opts: *mut LpiOptions, domain: LpiDomain) -> LpiStatus {
    with_options(opts, |o| {
        o.cfg.templates.preset = match domain {
            LpiDomain::Intervals => Preset::Intervals,
            LpiDomain::Octagons => Preset::Octagons,
            LpiDomain::Rich => Preset::Rich,
        };
        LpiStatus::Ok
    })
}

/// # Safety
/// `opts` must be a live options handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_set_unroll(opts: *mut LpiOptions, depth: u32) -> LpiStatus {
    with_options(opts, |o| {
        o.cfg.unroll = depth as usize;
        LpiStatus::Ok
    })
}

/// # Safety
/// `opts` must be a live options handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_set_congruence(opts: *mut LpiOptions, on: bool) -> LpiStatus {
    with_options(opts, |o| {
        o.cfg.congruence = on;
        LpiStatus::Ok
    })
}

/// Rational relaxation instead of exact integer reasoning.
///
/// # Safety
/// `opts` must be a live options handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_set_relaxed(opts: *mut LpiOptions, on: bool) -> LpiStatus {
    with_options(opts, |o| {
        o.cfg.integer_mode = if on { IntegerMode::Relaxed } else { IntegerMode::Exact };
        LpiStatus::Ok
    })
}

/// Walk the refinement ladder instead of running one configuration.
///
/// # Safety
/// `opts` must be a live options handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_set_refine(opts: *mut LpiOptions, on: bool) -> LpiStatus {
    with_options(opts, |o| {
        o.refine = on;
        LpiStatus::Ok
    })
}

/// Turns off one of `input-independence`, `syntactic-skip`,
/// `redundant-lemma`.
///
/// # Safety
/// `opts` must be a live options handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lpi_options_disable_heuristic(opts: *mut LpiOptions, name: *const c_char) -> LpiStatus {
    let name = match str_arg(name) {
        Ok(s) => s,
        Err(status) => return status,
    };
    with_options(opts, |o| {
        if o.cfg.toggles.disable(name) {
            LpiStatus::Ok
        } else {
            fail(LpiStatus::InvalidArgument, format!("unknown heuristic `{name}`"))
        }
    })
}

fn analyze(src: &str, opts: Option<&LpiOptions>) -> Result<LpiAnalysis, LpiStatus> {
    let cfa = lpi::frontend::compile(src).map_err(|e| {
        let status = match e {
            Error::Syntax { .. } | Error::Nonlinear { .. } | Error::Undeclared { .. } | Error::Redeclared { .. } | Error::Irreducible(_) => {
                LpiStatus::ParseError
            }
            _ => LpiStatus::AnalysisError,
        };
        fail(status, e.to_string())
    })?;
    let default = AnalysisConfig::default();
    let (cfg, refine) = opts.map_or((&default, false), |o| (&o.cfg, o.refine));
    let started = Instant::now();
    let (step, result) = if refine {
        let (i, r) = refine_ladder(&cfa, cfg).map_err(|e| fail(LpiStatus::AnalysisError, e.to_string()))?;
        (Some(i), r)
    } else {
        (None, run(&cfa, cfg).map_err(|e| fail(LpiStatus::AnalysisError, e.to_string()))?)
    };
    let wall_ms = started.elapsed().as_millis() as u64;
    let json = CString::new(Report::new(&result, step, wall_ms).to_json()).map_err(|_| fail(LpiStatus::AnalysisError, "report contains NUL"))?;
    Ok(LpiAnalysis {
        json,
        assertions: result.verdicts.iter().map(|v| (v.line as u32, v.verdict == Verdict::Proved)).collect(),
        complete: result.complete,
    })
}

/// Analyzes a program given as source text. `opts` may be null for the
/// defaults. On success `*out` receives a handle to free with
/// [`lpi_analysis_free`].
///
/// # Safety
/// `source` must be a NUL-terminated string, `opts` null or a live options
/// handle, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpi_analyze(source: *const c_char, opts: *const LpiOptions, out: *mut *mut LpiAnalysis) -> LpiStatus {
    if out.is_null() {
        return fail(LpiStatus::NullPointer, "null output pointer");
    }
    *out = ptr::null_mut();
    let src = match str_arg(source) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let opts = opts.as_ref();
    guard(|| match analyze(src, opts) {
        Ok(a) => {
            *out = Box::into_raw(Box::new(a));
            LpiStatus::Ok
        }
        Err(status) => status,
    })
}

/// # Safety
/// `a` must be null or a handle from [`lpi_analyze`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpi_analysis_free(a: *mut LpiAnalysis) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Whether the analysis finished and proved every assertion.
///
/// # Safety
/// `a` must be a live analysis handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_analysis_all_proved(a: *const LpiAnalysis) -> bool {
    a.as_ref().is_some_and(|a| a.complete && a.assertions.iter().all(|(_, p)| *p))
}

/// # Safety
/// `a` must be a live analysis handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_analysis_assertion_count(a: *const LpiAnalysis) -> usize {
    a.as_ref().map_or(0, |a| a.assertions.len())
}

/// Source line and verdict of the `index`-th assertion.
///
/// # Safety
/// `a` must be a live analysis handle; `line` and `proved` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lpi_analysis_assertion(a: *const LpiAnalysis, index: usize, line: *mut u32, proved: *mut bool) -> LpiStatus {
    let (Some(a), false, false) = (a.as_ref(), line.is_null(), proved.is_null()) else {
        return fail(LpiStatus::NullPointer, "null argument");
    };
    match a.assertions.get(index) {
        None => fail(LpiStatus::InvalidArgument, format!("assertion index {index} out of range")),
        Some((l, p)) => {
            *line = *l;
            *proved = *p;
            LpiStatus::Ok
        }
    }
}

/// The full report as JSON. Release with [`lpi_string_free`].
///
/// # Safety
/// `a` must be a live analysis handle.
#[no_mangle]
pub unsafe extern "C" fn lpi_analysis_json(a: *const LpiAnalysis) -> *mut c_char {
    match a.as_ref() {
        None => {
            set_error("null analysis handle");
            ptr::null_mut()
        }
        Some(a) => a.json.clone().into_raw(),
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
