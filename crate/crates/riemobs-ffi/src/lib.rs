//! C ABI over the observer-design toolkit. Benchmarks are opaque handles;
//! every call returns a status code and reports details through
//! `riemobs_last_error_message`. All functions are panic-safe: a caught
//! panic becomes `RO_STATUS_PANICKED` instead of unwinding across the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use riemobs::bench::{by_name, run_condition, BenchmarkSpec};
use riemobs::conditions::Verdict;
use riemobs::geometry::geodesic_bvp_distance;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RoStatus {
    /// Success.
    RoStatusOk = 0,
    /// A required pointer argument was null.
    RoStatusNullPointer = 1,
    /// A string argument was not valid UTF-8.
    RoStatusInvalidUtf8 = 2,
    /// No benchmark, metric or condition with the given name.
    RoStatusUnknownName = 3,
    /// An argument was out of range (dimension, index, non-finite value).
    RoStatusInvalidArgument = 4,
    /// The computation itself failed; see the last error message.
    RoStatusComputeFailed = 5,
    /// An internal panic was caught at the boundary.
    RoStatusPanicked = 6,
}

/// Verdict of a condition check.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RoVerdict {
    RoVerdictPass = 0,
    RoVerdictFail = 1,
    RoVerdictInconclusive = 2,
}

/// Opaque benchmark handle.
pub struct RoBenchmark {
    inner: BenchmarkSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: &str) {
    let clean: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(clean).unwrap();
    });
}

fn guard<F: FnOnce() -> RoStatus>(f: F) -> RoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            set_last_error(&format!("internal panic: {msg}"));
            RoStatus::RoStatusPanicked
        }
    }
}

/// Copy the most recent error message of this thread into `buf`
/// (NUL-terminated, truncated to `cap` bytes). Returns the full message
/// length in bytes excluding the NUL; call with a null `buf` or zero
/// `cap` to query the length.
///
/// # Safety
/// `buf` must either be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn riemobs_last_error_message(
    buf: *mut c_char,
    cap: usize,
) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string; never null, do not
/// free.
#[no_mangle]
pub extern "C" fn riemobs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn cstr_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, RoStatus> {
    if p.is_null() {
        set_last_error(&format!("{what} is null"));
        return Err(RoStatus::RoStatusNullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_last_error(&format!("{what} is not valid UTF-8"));
        RoStatus::RoStatusInvalidUtf8
    })
}

/// Build a catalog benchmark by name ("linear", "oscillator", "planar",
/// "circle") and store the handle in `*out`. The handle must be released
/// with `riemobs_benchmark_free`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn riemobs_benchmark_new(
    name: *const c_char,
    out: *mut *mut RoBenchmark,
) -> RoStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("out is null");
            return RoStatus::RoStatusNullPointer;
        }
        let name = match cstr_arg(name, "name") {
            Ok(s) => s,
            Err(st) => return st,
        };
        match by_name(name) {
            Ok(b) => {
                *out = Box::into_raw(Box::new(RoBenchmark { inner: b }));
                RoStatus::RoStatusOk
            }
            Err(e) => {
                set_last_error(&e.to_string());
                RoStatus::RoStatusUnknownName
            }
        }
    })
}

/// Release a benchmark handle. Null is accepted and ignored.
///
/// # Safety
/// `b` must be null or a handle obtained from `riemobs_benchmark_new`
/// that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn riemobs_benchmark_free(b: *mut RoBenchmark) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// State dimension of the benchmark model.
///
/// # Safety
/// `b` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn riemobs_benchmark_state_dim(
    b: *const RoBenchmark,
    out: *mut usize,
) -> RoStatus {
    guard(|| {
        if b.is_null() || out.is_null() {
            set_last_error("benchmark or out is null");
            return RoStatus::RoStatusNullPointer;
        }
        *out = (*b).inner.model.state_dim();
        RoStatus::RoStatusOk
    })
}

/// Number of candidate metrics the benchmark carries.
///
/// # Safety
/// `b` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn riemobs_benchmark_metric_count(
    b: *const RoBenchmark,
    out: *mut usize,
) -> RoStatus {
    guard(|| {
        if b.is_null() || out.is_null() {
            set_last_error("benchmark or out is null");
            return RoStatus::RoStatusNullPointer;
        }
        *out = (*b).inner.metrics.len();
        RoStatus::RoStatusOk
    })
}

/// Copy the name of metric `index` into `buf` (NUL-terminated, truncated
/// to `cap`). Returns the status; the full length is reported through the
/// return value of `riemobs_last_error_message` conventions not needed
/// here because names are short; a 64-byte buffer always suffices for the
/// catalog.
///
/// # Safety
/// `b` must be a live handle; `buf` must point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn riemobs_benchmark_metric_name(
    b: *const RoBenchmark,
    index: usize,
    buf: *mut c_char,
    cap: usize,
) -> RoStatus {
    guard(|| {
        if b.is_null() || buf.is_null() {
            set_last_error("benchmark or buf is null");
            return RoStatus::RoStatusNullPointer;
        }
        if cap == 0 {
            set_last_error("cap is zero");
            return RoStatus::RoStatusInvalidArgument;
        }
        let metrics = &(*b).inner.metrics;
        let Some(m) = metrics.get(index) else {
            set_last_error(&format!(
                "metric index {index} out of range (count {})",
                metrics.len()
            ));
            return RoStatus::RoStatusInvalidArgument;
        };
        let bytes = m.name.as_bytes();
        let n = bytes.len().min(cap - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        RoStatus::RoStatusOk
    })
}

/// Run one condition check ("a2", "a3-nullity", "a3-direct",
/// "submersion") on the named metric. `samples` counts region samples
/// (geodesic trials for the direct check); `tol` is the residual
/// tolerance, or `<= 0` for the default; the decay check uses the
/// benchmark's rate floor. Writes the verdict and the margin (NaN when
/// the check reports none).
///
/// # Safety
/// `b` must be a live handle; `metric` and `condition` must be
/// NUL-terminated strings; `verdict_out` and `margin_out` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn riemobs_check(
    b: *const RoBenchmark,
    metric: *const c_char,
    condition: *const c_char,
    samples: usize,
    seed: u64,
    tol: f64,
    verdict_out: *mut RoVerdict,
    margin_out: *mut f64,
) -> RoStatus {
    guard(|| {
        if b.is_null() || verdict_out.is_null() || margin_out.is_null() {
            set_last_error("benchmark or output pointer is null");
            return RoStatus::RoStatusNullPointer;
        }
        let metric = match cstr_arg(metric, "metric") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let condition = match cstr_arg(condition, "condition") {
            Ok(s) => s,
            Err(st) => return st,
        };
        if samples == 0 {
            set_last_error("samples must be positive");
            return RoStatus::RoStatusInvalidArgument;
        }
        let tol = if tol > 0.0 { tol } else { 1e-6 };
        let bench = &(*b).inner;
        match run_condition(bench, metric, condition, samples, seed, tol, None)
        {
            Ok(report) => {
                *verdict_out = match report.verdict {
                    Verdict::Pass => RoVerdict::RoVerdictPass,
                    Verdict::Fail => RoVerdict::RoVerdictFail,
                    Verdict::Inconclusive => RoVerdict::RoVerdictInconclusive,
                };
                *margin_out = report.margin.unwrap_or(f64::NAN);
                RoStatus::RoStatusOk
            }
            Err(riemobs::Error::Config(msg)) => {
                set_last_error(&msg);
                RoStatus::RoStatusUnknownName
            }
            Err(e) => {
                set_last_error(&e.to_string());
                RoStatus::RoStatusComputeFailed
            }
        }
    })
}

/// Riemannian distance between two states in the named metric (two-point
/// geodesic solve, unconstrained by the region).
///
/// # Safety
/// `b` must be a live handle; `metric` must be a NUL-terminated string;
/// `x` and `y` must point to `dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn riemobs_distance(
    b: *const RoBenchmark,
    metric: *const c_char,
    x: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> RoStatus {
    guard(|| {
        if b.is_null() || x.is_null() || y.is_null() || out.is_null() {
            set_last_error("benchmark, state or out pointer is null");
            return RoStatus::RoStatusNullPointer;
        }
        let metric = match cstr_arg(metric, "metric") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let bench = &(*b).inner;
        let n = bench.model.state_dim();
        if dim != n {
            set_last_error(&format!("dim {dim} does not match model dimension {n}"));
            return RoStatus::RoStatusInvalidArgument;
        }
        let Some(nm) = bench.metric(metric) else {
            set_last_error(&format!(
                "benchmark {:?} has no metric {metric:?}",
                bench.name
            ));
            return RoStatus::RoStatusUnknownName;
        };
        let xs = std::slice::from_raw_parts(x, dim);
        let ys = std::slice::from_raw_parts(y, dim);
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            set_last_error("states must be finite");
            return RoStatus::RoStatusInvalidArgument;
        }
        match geodesic_bvp_distance(&nm.metric, xs, ys, None) {
            Ok(d) => {
                *out = d;
                RoStatus::RoStatusOk
            }
            Err(e) => {
                set_last_error(&e.to_string());
                RoStatus::RoStatusComputeFailed
            }
        }
    })
}
