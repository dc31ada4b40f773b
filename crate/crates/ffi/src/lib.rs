//! C ABI over the scenario runner, the 1D oracle and the integrand catalog.
//!
//! Every entry point returns a [`BvcStatus`]; on failure the message is kept
//! per thread and read back with [`bvc_last_error`]. Handles are opaque and
//! released with their `_free` function. Strings returned through `char**`
//! belong to the caller and go back through [`bvc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use bvcalc::functional::recession_value;
use bvcalc::integrands::{from_id, Catalog, Integrand};
use bvcalc::scenarios::{self, oracle_1d, OracleCase, Report, RunConfig};
use bvcalc::{Error, Mat};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownScenario = 3,
    InvalidArgument = 4,
    Parse = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(BvcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownScenario(_) => BvcStatus::UnknownScenario,
            Error::Config(_) | Error::DimensionMismatch(_) | Error::Integrand(_) => BvcStatus::InvalidArgument,
            Error::Parse(_) | Error::Expression(_) => BvcStatus::Parse,
            Error::Io(_) => BvcStatus::Io,
            _ => BvcStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: BvcStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `body`, records any error or panic, and maps it to a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BvcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BvcStatus::Ok,
        Ok(Err(Failure(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {m}"));
            BvcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(BvcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BvcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(BvcStatus::NullPointer, format!("{what} is null")))
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(BvcStatus::InvalidArgument, "string contains NUL"))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bvc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string handed out by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bvc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of scenarios in the catalog.
#[no_mangle]
pub extern "C" fn bvc_scenario_count() -> usize {
    scenarios::scenario_catalog().len()
}

/// Identifier of scenario `index`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_scenario_id(index: usize, out: *mut *mut c_char) -> BvcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cat = scenarios::scenario_catalog();
        let s = cat
            .get(index)
            .ok_or_else(|| fail(BvcStatus::InvalidArgument, format!("index {index} >= {}", cat.len())))?;
        *out = c_string(s.id.to_string())?;
        Ok(())
    })
}

/// A finished scenario run.
pub struct BvcReport {
    report: Report,
}

/// Runs a scenario. With a null `output_dir` nothing is written to disk.
///
/// # Safety
/// `scenario` and a non-null `output_dir` must be NUL-terminated strings;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_run_scenario(
    scenario: *const c_char,
    resolution: usize,
    jmax: usize,
    tolerance: f64,
    seed: u64,
    output_dir: *const c_char,
    out: *mut *mut BvcReport,
) -> BvcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let mut config = RunConfig::new(str_arg(scenario, "scenario")?);
        config.resolution = resolution;
        config.jmax = jmax;
        config.tolerance = tolerance;
        config.seed = seed;
        let report = if output_dir.is_null() {
            scenarios::evaluate_scenario(&config)?.0
        } else {
            config.output = PathBuf::from(str_arg(output_dir, "output_dir")?);
            scenarios::run(&config)?
        };
        *out = Box::into_raw(Box::new(BvcReport { report }));
        Ok(())
    })
}

/// Whether every expected-outcome clause held.
///
/// # Safety
/// `report` must be a live handle and `passed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_report_passed(report: *const BvcReport, passed: *mut bool) -> BvcStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| fail(BvcStatus::NullPointer, "report is null"))?;
        *out_arg(passed, "passed")? = r.report.passed;
        Ok(())
    })
}

/// The report as JSON, byte-identical to `report.json`.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_report_json(report: *const BvcReport, out: *mut *mut c_char) -> BvcStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| fail(BvcStatus::NullPointer, "report is null"))?;
        let out = out_arg(out, "out")?;
        *out = c_string(r.report.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`bvc_run_scenario`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bvc_report_free(report: *mut BvcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Evaluates a 1D case given as JSON with the reference summation.
///
/// # Safety
/// `case_json` must be a NUL-terminated string and `value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_oracle_1d(case_json: *const c_char, value: *mut f64) -> BvcStatus {
    guard(|| {
        let case: OracleCase = serde_json::from_str(str_arg(case_json, "case_json")?)
            .map_err(|e| fail(BvcStatus::Parse, e.to_string()))?;
        *out_arg(value, "value")? = oracle_1d(&case)?;
        Ok(())
    })
}

/// A catalog integrand.
pub struct BvcIntegrand {
    f: Catalog,
}

/// Looks up an integrand by identifier (`norm`, `area`, `w-shape`,
/// `shifted-norm`, optionally prefixed with `x-modulated-`).
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_integrand_new(id: *const c_char, out: *mut *mut BvcIntegrand) -> BvcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let f = from_id(str_arg(id, "id")?)?;
        *out = Box::into_raw(Box::new(BvcIntegrand { f }));
        Ok(())
    })
}

/// Matrices are at most 2×2.
const MAX_SIDE: usize = 2;

unsafe fn matrix(a: *const f64, rows: usize, cols: usize) -> Result<Mat, Failure> {
    if rows == 0 || cols == 0 || rows > MAX_SIDE || cols > MAX_SIDE {
        return Err(fail(BvcStatus::InvalidArgument, format!("unsupported shape {rows}x{cols}")));
    }
    if a.is_null() {
        return Err(fail(BvcStatus::NullPointer, "matrix is null"));
    }
    Ok(Mat::from_rows(rows, cols, std::slice::from_raw_parts(a, rows * cols)))
}

/// `F(x, A)` with `A` given row-major.
///
/// # Safety
/// `f` must be a live handle, `a` must point to `rows·cols` doubles and
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bvc_integrand_eval(
    f: *const BvcIntegrand,
    x0: f64,
    x1: f64,
    a: *const f64,
    rows: usize,
    cols: usize,
    value: *mut f64,
) -> BvcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| fail(BvcStatus::NullPointer, "integrand is null"))?;
        let a = matrix(a, rows, cols)?;
        *out_arg(value, "value")? = f.f.eval([x0, x1], &a);
        Ok(())
    })
}

/// `F^∞(x, A)`.
///
/// # Safety
/// As for [`bvc_integrand_eval`].
#[no_mangle]
pub unsafe extern "C" fn bvc_integrand_recession(
    f: *const BvcIntegrand,
    x0: f64,
    x1: f64,
    a: *const f64,
    rows: usize,
    cols: usize,
    value: *mut f64,
) -> BvcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| fail(BvcStatus::NullPointer, "integrand is null"))?;
        let a = matrix(a, rows, cols)?;
        *out_arg(value, "value")? = recession_value(&f.f, [x0, x1], &a)?;
        Ok(())
    })
}

/// # Safety
/// `f` must come from [`bvc_integrand_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bvc_integrand_free(f: *mut BvcIntegrand) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}
