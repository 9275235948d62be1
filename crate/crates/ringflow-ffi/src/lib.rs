//! C interface to the simulator core.
//!
//! Conventions, chosen so that bindings in other languages stay thin:
//!
//! * Configuration goes in as a JSON string with the same schema the CLI
//!   reads; results come back either through an opaque [`RfFlow`] handle or
//!   as JSON strings.
//! * Every fallible call returns an [`RfStatus`].  On failure a thread-local
//!   message is set and can be read with [`rf_last_error_message`].
//! * Strings returned by `*_json` functions are heap-allocated and must be
//!   released with [`rf_string_free`]; handles with [`rf_flow_free`].
//! * No call unwinds across the boundary; panics are caught and reported as
//!   `RF_STATUS_INTERNAL`.
//!
//! The matching header is generated into `include/ringflow.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ringflow::config::RunConfig;
use ringflow::engine::{run_flow, FlowMetrics, FlowOutput};
use ringflow::report::{self, Provenance};
use ringflow::Error;

/// Outcome of an interface call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    /// Call succeeded.
    RfStatusOk = 0,
    /// A required pointer argument was null.
    RfStatusNullArgument = 1,
    /// An input string was not valid UTF-8.
    RfStatusInvalidUtf8 = 2,
    /// The configuration failed to parse or validate.
    RfStatusBadConfig = 3,
    /// The run itself failed (integration, normalisation, eigensolve).
    RfStatusNumericFailure = 4,
    /// A buffer was too small or an index out of range.
    RfStatusOutOfRange = 5,
    /// Unexpected internal failure, including caught panics.
    RfStatusInternal = 6,
}

/// Opaque result of one completed flow run.  Owned by the caller once
/// returned; release with [`rf_flow_free`].
pub struct RfFlow {
    out: FlowOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    // NUL bytes cannot appear in our own messages, but cheap to be safe.
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(status: RfStatus, message: &str) -> RfStatus {
    set_error(message);
    status
}

fn status_of(err: &Error) -> RfStatus {
    match err {
        Error::InvalidParameter { .. } | Error::Config { .. } | Error::Json(_) => {
            RfStatus::RfStatusBadConfig
        }
        Error::Normalization { .. }
        | Error::Integration { .. }
        | Error::Numeric { .. }
        | Error::Grid { .. } => RfStatus::RfStatusNumericFailure,
        Error::IndexOutOfRange { .. } | Error::ShapeMismatch { .. } => {
            RfStatus::RfStatusOutOfRange
        }
        Error::Io(_) => RfStatus::RfStatusInternal,
    }
}

fn fail_with(err: &Error) -> RfStatus {
    fail(status_of(err), &err.to_string())
}

/// Runs `body` with panics converted to `RF_STATUS_INTERNAL`.
fn guarded(body: impl FnOnce() -> RfStatus) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(RfStatus::RfStatusInternal, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn read_c_str<'a>(ptr: *const c_char) -> Result<&'a str, RfStatus> {
    if ptr.is_null() {
        return Err(fail(RfStatus::RfStatusNullArgument, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(RfStatus::RfStatusInvalidUtf8, "string is not valid UTF-8"))
}

fn parse_config(json: &str) -> Result<RunConfig, RfStatus> {
    let cfg: RunConfig = serde_json::from_str(json).map_err(|e| {
        fail(
            RfStatus::RfStatusBadConfig,
            &format!("config JSON did not parse: {e}"),
        )
    })?;
    Ok(cfg)
}

fn export_string(s: String, out: *mut *mut c_char) -> RfStatus {
    if out.is_null() {
        return fail(RfStatus::RfStatusNullArgument, "null output pointer");
    }
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            RfStatus::RfStatusOk
        }
        Err(_) => fail(
            RfStatus::RfStatusInternal,
            "generated string contained a NUL byte",
        ),
    }
}

/// Version of the underlying simulator crate as a static NUL-terminated
/// string.  Never null; do not free.
#[no_mangle]
pub extern "C" fn rf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the message from the most recent failure on this thread into
/// `buf` (NUL-terminated, truncated to `cap` bytes) and returns the full
/// message length in bytes, excluding the NUL.  Call with a null `buf` or
/// zero `cap` to query the length first.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn rf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses `config_json`, runs the dissipative dynamics and the sign
/// segmentation, and stores an owned handle in `*out`.  On failure `*out`
/// is left untouched.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_run_json(
    config_json: *const c_char,
    out: *mut *mut RfFlow,
) -> RfStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RfStatus::RfStatusNullArgument, "null output pointer");
        }
        let json = match read_c_str(config_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let cfg = match parse_config(json) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match run_flow(&cfg) {
            Ok(flow) => {
                *out = Box::into_raw(Box::new(RfFlow { out: flow }));
                RfStatus::RfStatusOk
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Releases a handle returned by [`rf_flow_run_json`].  Null is a no-op.
///
/// # Safety
/// `flow` must be a pointer previously returned by this library and not
/// already freed.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_free(flow: *mut RfFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}

/// Number of time samples held by the handle, 0 if `flow` is null.
///
/// # Safety
/// `flow` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_sample_count(flow: *const RfFlow) -> usize {
    if flow.is_null() {
        return 0;
    }
    (*flow).out.series.times.len()
}

/// Copies the sampled series into caller-provided buffers.  Each of
/// `times`, `distance` and `rate` may be null to skip that column; non-null
/// buffers must hold at least [`rf_flow_sample_count`] doubles (`cap` says
/// how many they hold).
///
/// # Safety
/// Non-null buffers must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_series(
    flow: *const RfFlow,
    times: *mut f64,
    distance: *mut f64,
    rate: *mut f64,
    cap: usize,
) -> RfStatus {
    guarded(|| {
        if flow.is_null() {
            return fail(RfStatus::RfStatusNullArgument, "null flow handle");
        }
        let series = &(*flow).out.series;
        let n = series.times.len();
        if (!times.is_null() || !distance.is_null() || !rate.is_null()) && cap < n {
            return fail(
                RfStatus::RfStatusOutOfRange,
                &format!("buffer holds {cap} samples, run has {n}"),
            );
        }
        if !times.is_null() {
            std::ptr::copy_nonoverlapping(series.times.as_ptr(), times, n);
        }
        if !distance.is_null() {
            std::ptr::copy_nonoverlapping(series.d.as_ptr(), distance, n);
        }
        if !rate.is_null() {
            std::ptr::copy_nonoverlapping(series.r.as_ptr(), rate, n);
        }
        RfStatus::RfStatusOk
    })
}

/// Headline numbers of the sign segmentation.  Any output pointer may be
/// null to skip that value.  `degenerate` is written as 0 or 1.
///
/// # Safety
/// Non-null pointers must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_metrics(
    flow: *const RfFlow,
    n_switch: *mut usize,
    a_mod: *mut f64,
    positive_fraction: *mut f64,
    degenerate: *mut u8,
) -> RfStatus {
    guarded(|| {
        if flow.is_null() {
            return fail(RfStatus::RfStatusNullArgument, "null flow handle");
        }
        let metrics = FlowMetrics::from(&(*flow).out.segments);
        if !n_switch.is_null() {
            *n_switch = metrics.n_switch;
        }
        if !a_mod.is_null() {
            *a_mod = metrics.a_mod;
        }
        if !positive_fraction.is_null() {
            *positive_fraction = metrics.positive_fraction;
        }
        if !degenerate.is_null() {
            *degenerate = metrics.degenerate as u8;
        }
        RfStatus::RfStatusOk
    })
}

/// Serialises the segmentation (with full run provenance) to JSON, the same
/// document the CLI writes next to its CSV.  Free the string with
/// [`rf_string_free`].
///
/// # Safety
/// `flow` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_segments_json(
    flow: *const RfFlow,
    out: *mut *mut c_char,
) -> RfStatus {
    guarded(|| {
        if flow.is_null() {
            return fail(RfStatus::RfStatusNullArgument, "null flow handle");
        }
        let output = &(*flow).out;
        let prov = Provenance::from_run(&output.resolved);
        match report::segments_json(&prov, &output.segments) {
            Ok(doc) => export_string(doc, out),
            Err(err) => fail_with(&err),
        }
    })
}

/// Serialises the sampled series as CSV (`t,D,R,sign` rows, CRLF line ends,
/// identical to the CLI artifact).  Free the string with [`rf_string_free`].
///
/// # Safety
/// `flow` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_flow_csv(flow: *const RfFlow, out: *mut *mut c_char) -> RfStatus {
    guarded(|| {
        if flow.is_null() {
            return fail(RfStatus::RfStatusNullArgument, "null flow handle");
        }
        let output = &(*flow).out;
        export_string(report::flow_csv(&output.series, &output.segments), out)
    })
}

/// Computes the closed ring's one-excitation spectrum for `config_json`
/// (dynamics settings are ignored) and returns the CLI's spectrum document.
/// Free the string with [`rf_string_free`].
///
/// # Safety
/// `config_json` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_spectrum_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> RfStatus {
    guarded(|| {
        let json = match read_c_str(config_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let cfg = match parse_config(json) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let spectrum = match cfg.chain.spectrum(cfg.convention) {
            Ok(s) => s,
            Err(err) => return fail_with(&err),
        };
        match report::spectrum_json(&cfg.chain, &spectrum) {
            Ok(doc) => export_string(doc, out),
            Err(err) => fail_with(&err),
        }
    })
}

/// Releases a string returned by any `*_json` or `*_csv` function.  Null is
/// a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not
/// already freed.
#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
