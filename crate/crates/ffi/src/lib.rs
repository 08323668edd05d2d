//! C ABI for scaffoldlab.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns an [`SlStatus`] and
//! records a message readable through [`sl_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use scaffoldlab::{analyze, load_config, parse_config, Case, Error, Format, Report};

/// Status codes. The nonzero error codes 1 to 3 match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    /// Configuration, syntax or i/o error.
    Config = 1,
    /// Series precision ran out after all retries.
    Precision = 2,
    /// An identity that must hold failed.
    Contract = 3,
    /// Null pointer or non-UTF-8 string argument.
    InvalidArgument = 4,
    /// The library panicked; the handle arguments are left untouched.
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlFormat {
    Json = 0,
    Text = 1,
}

/// A validated case configuration.
pub struct SlCase {
    inner: Case,
}

/// The result of analyzing a case.
pub struct SlReport {
    inner: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> SlStatus {
    match err.exit_code() {
        2 => SlStatus::Precision,
        3 => SlStatus::Contract,
        _ => SlStatus::Config,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SlStatus, String)>) -> SlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            SlStatus::Panic
        }
    }
}

fn lib_error(err: Error) -> (SlStatus, String) {
    (status_of(&err), err.to_string())
}

fn invalid(message: &str) -> (SlStatus, String) {
    (SlStatus::InvalidArgument, message.to_string())
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (SlStatus, String)> {
    if s.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

fn boxed_case(out: *mut *mut SlCase, case: Case) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(SlCase { inner: case })) };
}

/// Parses and validates a JSON case configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_case_parse(json: *const c_char, out: *mut *mut SlCase) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let text = read_str(json, "json")?;
        let case = parse_config(text).and_then(|c| c.validate()).map_err(lib_error)?;
        boxed_case(out, case);
        Ok(())
    })
}

/// Reads, parses and validates a case file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_case_load(path: *const c_char, out: *mut *mut SlCase) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let path = read_str(path, "path")?;
        let case = load_config(Path::new(path)).map_err(lib_error)?;
        boxed_case(out, case);
        Ok(())
    })
}

/// # Safety
/// `case` must be null or a handle from `sl_case_parse`/`sl_case_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_case_free(case: *mut SlCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// Runs the full pipeline on a case.
///
/// # Safety
/// `case` must be a live case handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_analyze(case: *const SlCase, out: *mut *mut SlReport) -> SlStatus {
    guard(|| {
        if case.is_null() || out.is_null() {
            return Err(invalid("case or out is null"));
        }
        let report = analyze(&(*case).inner).map_err(lib_error)?;
        *out = Box::into_raw(Box::new(SlReport { inner: report }));
        Ok(())
    })
}

/// Renders a report. The string is owned by the caller; free it with `sl_string_free`.
///
/// # Safety
/// `report` must be a live report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_report_render(report: *const SlReport, format: SlFormat, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return Err(invalid("report or out is null"));
        }
        let format = match format {
            SlFormat::Json => Format::Json,
            SlFormat::Text => Format::Text,
        };
        let text = (*report).inner.render(format);
        *out = CString::new(text).map_err(|_| invalid("report contains NUL"))?.into_raw();
        Ok(())
    })
}

/// Whether the case met every assumption. False for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn sl_report_eligible(report: *const SlReport) -> bool {
    !report.is_null() && (*report).inner.eligible
}

/// Writes the lower breaks into `out` (capacity `len`) and returns how many
/// there are; the caller retries with a larger buffer if that exceeds `len`.
///
/// # Safety
/// `report` must be null or a live report handle; `out` must hold `len` values or be null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn sl_report_lower_breaks(report: *const SlReport, out: *mut i64, len: usize) -> usize {
    if report.is_null() {
        return 0;
    }
    let b = &(*report).inner.b;
    if !out.is_null() {
        ptr::copy_nonoverlapping(b.as_ptr(), out, b.len().min(len));
    }
    b.len()
}

/// 1 when the scaffold verified, 0 when it failed, -1 when it was not run.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn sl_report_scaffold_valid(report: *const SlReport) -> i32 {
    if report.is_null() {
        return -1;
    }
    match &(*report).inner.certificate {
        Some(cert) => cert.valid as i32,
        None => -1,
    }
}

/// # Safety
/// `report` must be null or a handle from `sl_analyze` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_report_free(report: *mut SlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
