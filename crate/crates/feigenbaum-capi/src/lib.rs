//! C ABI for the certified computation of the Feigenbaum function and
//! the constant `alpha = 1/g(1)`.
//!
//! Conventions, mirrored in the generated `include/feigenbaum.h`:
//!
//! * Every fallible call returns an [`FgStatus`]; out-parameters are
//!   written only on `FG_OK` and never read.
//! * [`FgState`] is an opaque handle to one iteration state. Handles are
//!   created by `fg_state_new`, `fg_state_clone` and
//!   `fg_checkpoint_load`, and released with `fg_state_free`. A handle
//!   is not thread-safe; share across threads only with external
//!   synchronization.
//! * Strings returned through `char **` are NUL-terminated UTF-8 decimal
//!   text owned by the caller; release them with `fg_string_free`.
//! * Every entry point catches panics and reports `FG_PANIC` instead of
//!   unwinding across the boundary.
//! * `fg_last_error_message` returns a human-readable detail for the
//!   most recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use feigenbaum::driver::{self, IterationState};
use feigenbaum::Error;

/// Opaque handle to one iteration state (a certified approximant of the
/// fixed point, together with its depth and error bound).
pub struct FgState(IterationState);

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FgStatus {
    /// Success; out-parameters are valid.
    FgOk = 0,
    /// A required pointer argument was null.
    FgNullArgument = 1,
    /// An argument value is outside its documented domain.
    FgInvalidArgument = 2,
    /// Arithmetic failure, such as a divisor enclosure containing zero.
    FgArithmetic = 3,
    /// The state is too shallow for the requested digits or order;
    /// advance the iteration further and retry.
    FgInsufficientPrecision = 4,
    /// Internal certification failure; the result could not be
    /// guaranteed and nothing was returned.
    FgCertification = 5,
    /// Malformed or corrupt checkpoint text.
    FgCorruptCheckpoint = 6,
    /// File input/output failure.
    FgIo = 7,
    /// Text crossing the boundary was not valid UTF-8 or contained an
    /// interior NUL byte.
    FgText = 8,
    /// A panic was caught at the boundary; treat involved handles as
    /// unusable.
    FgPanic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let stored = CString::new(msg).unwrap_or_else(|_| {
        CString::new("error message contained an interior NUL").expect("literal has no NUL")
    });
    LAST_ERROR.with(|c| *c.borrow_mut() = Some(stored));
}

fn fail(e: &Error) -> FgStatus {
    set_last_error(e.to_string());
    match e {
        Error::DivisionByZero
        | Error::DivisorContainsZero { .. }
        | Error::InvertedInterval { .. }
        | Error::LambdaContainsZero
        | Error::SeriesDivisionByZero => FgStatus::FgArithmetic,
        Error::InsufficientPrecision { .. } | Error::OrderUnavailable { .. } => {
            FgStatus::FgInsufficientPrecision
        }
        Error::Certification { .. } | Error::MagnitudeOverflow { .. } | Error::BudgetExceeded { .. } => {
            FgStatus::FgCertification
        }
        Error::CorruptCheckpoint(_) => FgStatus::FgCorruptCheckpoint,
        Error::Io(_) => FgStatus::FgIo,
        Error::Parse { .. } => FgStatus::FgText,
    }
}

fn null_arg(msg: &str) -> FgStatus {
    set_last_error(msg.to_string());
    FgStatus::FgNullArgument
}

fn guarded(f: impl FnOnce() -> FgStatus) -> FgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("panic caught at the C boundary".to_string());
            FgStatus::FgPanic
        }
    }
}

/// # Safety
/// `out` must be a valid, writable pointer.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> FgStatus {
    match CString::new(s) {
        Ok(cs) => {
            *out = cs.into_raw();
            FgStatus::FgOk
        }
        Err(_) => {
            set_last_error("output contained an interior NUL".to_string());
            FgStatus::FgText
        }
    }
}

/// Create the seed state (depth 0, certified distance 0.01 to the fixed
/// point). On success writes a new handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fg_state_new(out: *mut *mut FgState) -> FgStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("fg_state_new: out is null");
        }
        *out = Box::into_raw(Box::new(FgState(driver::initial_state())));
        FgStatus::FgOk
    })
}

/// Duplicate a handle. The copy is independent of the original.
///
/// # Safety
/// `state` must be a live handle from this library; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fg_state_clone(state: *const FgState, out: *mut *mut FgState) -> FgStatus {
    guarded(|| {
        if state.is_null() || out.is_null() {
            return null_arg("fg_state_clone: null argument");
        }
        *out = Box::into_raw(Box::new(FgState((*state).0.clone())));
        FgStatus::FgOk
    })
}

/// Release a handle. Passing null is a no-op; passing the same handle
/// twice is undefined behavior.
///
/// # Safety
/// `state` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fg_state_free(state: *mut FgState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Read the iteration depth `m` of a state.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_state_depth(state: *const FgState, out: *mut u32) -> FgStatus {
    guarded(|| {
        if state.is_null() || out.is_null() {
            return null_arg("fg_state_depth: null argument");
        }
        *out = (*state).0.m();
        FgStatus::FgOk
    })
}

/// Advance a state by `steps` certified iteration steps. On failure the
/// state is left unchanged.
///
/// # Safety
/// `state` must be a live handle not aliased by concurrent calls.
#[no_mangle]
pub unsafe extern "C" fn fg_state_advance(state: *mut FgState, steps: u32) -> FgStatus {
    guarded(|| {
        if state.is_null() {
            return null_arg("fg_state_advance: state is null");
        }
        let handle = &mut *state;
        let target = handle.0.m().saturating_add(steps);
        if let Err(e) = driver::verify_error_chain(target) {
            return fail(&e);
        }
        match driver::run_steps(handle.0.clone(), steps, |_| Ok(())) {
            Ok(next) => {
                handle.0 = next;
                FgStatus::FgOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// The certified coordinate-norm distance from the state to the fixed
/// point (`0.01 * 0.93^m` rounded up), as a decimal string with `scale`
/// fractional digits.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable. Release the
/// string with `fg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fg_state_error_bound(
    state: *const FgState,
    scale: u32,
    out: *mut *mut c_char,
) -> FgStatus {
    guarded(|| {
        if state.is_null() || out.is_null() {
            return null_arg("fg_state_error_bound: null argument");
        }
        let s = (*state).0.error_bound_upper(scale).to_string();
        write_string(out, s)
    })
}

/// The iteration depth required before `alpha` can be certified to
/// `digits` fractional digits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_depth_for_digits(digits: u32, out: *mut u32) -> FgStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("fg_depth_for_digits: out is null");
        }
        *out = driver::m_for_alpha(digits);
        FgStatus::FgOk
    })
}

/// Extract `alpha = 1/g(1)` from a state: a decimal value with exactly
/// `digits` fractional digits and a certified bound on its distance to
/// the true constant (at most `10^-digits`). Fails with
/// `FG_INSUFFICIENT_PRECISION` if the state is too shallow; see
/// `fg_depth_for_digits`.
///
/// # Safety
/// `state` must be a live handle; `value_out` and `bound_out` must be
/// writable. Release both strings with `fg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fg_alpha(
    state: *const FgState,
    digits: u32,
    value_out: *mut *mut c_char,
    bound_out: *mut *mut c_char,
) -> FgStatus {
    guarded(|| {
        if state.is_null() || value_out.is_null() || bound_out.is_null() {
            return null_arg("fg_alpha: null argument");
        }
        match driver::alpha(&(*state).0, digits) {
            Ok(a) => {
                let st = write_string(value_out, a.value.to_string());
                if st != FgStatus::FgOk {
                    return st;
                }
                let st = write_string(bound_out, a.error_bound.to_string());
                if st != FgStatus::FgOk {
                    fg_string_free(*value_out);
                    *value_out = ptr::null_mut();
                }
                st
            }
            Err(e) => fail(&e),
        }
    })
}

/// One-shot convenience: run the iteration from the seed to the depth
/// required for `digits` fractional digits and extract `alpha` as with
/// `fg_alpha`. Runtime grows quickly with `digits` (about ten seconds
/// for 8 digits on commodity hardware, much more beyond).
///
/// # Safety
/// `value_out` and `bound_out` must be writable. Release both strings
/// with `fg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fg_alpha_digits(
    digits: u32,
    value_out: *mut *mut c_char,
    bound_out: *mut *mut c_char,
) -> FgStatus {
    guarded(|| {
        if value_out.is_null() || bound_out.is_null() {
            return null_arg("fg_alpha_digits: null argument");
        }
        let m = driver::m_for_alpha(digits);
        if let Err(e) = driver::verify_error_chain(m) {
            return fail(&e);
        }
        let s = match driver::run_steps(driver::initial_state(), m, |_| Ok(())) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let handle = FgState(s);
        fg_alpha(&handle, digits, value_out, bound_out)
    })
}

/// Certified enclosures of the Taylor coefficients `a_1 ..= a_order` of
/// the fixed point (`g(z) = 1 + a_1 z^2 + a_2 z^4 + ...`), each of
/// width at most `10^-digits`. The output is one line per coefficient,
/// `"<index> <lower> <upper>"`, joined by newlines.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable. Release the
/// string with `fg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fg_taylor_enclosures(
    state: *const FgState,
    order: u32,
    digits: u32,
    out: *mut *mut c_char,
) -> FgStatus {
    guarded(|| {
        if state.is_null() || out.is_null() {
            return null_arg("fg_taylor_enclosures: null argument");
        }
        match driver::taylor(&(*state).0, order, digits) {
            Ok(coeffs) => {
                let text = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| format!("{} {} {}", i + 1, iv.lo(), iv.hi()))
                    .collect::<Vec<_>>()
                    .join("\n");
                write_string(out, text)
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serialize a state to checkpoint text (self-describing, integrity
/// checked, bit-exact across save/load).
///
/// # Safety
/// `state` must be a live handle; `out` must be writable. Release the
/// string with `fg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fg_checkpoint_save(state: *const FgState, out: *mut *mut c_char) -> FgStatus {
    guarded(|| {
        if state.is_null() || out.is_null() {
            return null_arg("fg_checkpoint_save: null argument");
        }
        write_string(out, driver::checkpoint_string(&(*state).0))
    })
}

/// Restore a state from checkpoint text produced by
/// `fg_checkpoint_save`. Tampered or truncated text is rejected with
/// `FG_CORRUPT_CHECKPOINT`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_checkpoint_load(text: *const c_char, out: *mut *mut FgState) -> FgStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return null_arg("fg_checkpoint_load: null argument");
        }
        let text = match CStr::from_ptr(text).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_last_error("checkpoint text is not valid UTF-8".to_string());
                return FgStatus::FgText;
            }
        };
        match driver::parse_checkpoint(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(FgState(s)));
                FgStatus::FgOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this library, released at
/// most once.
#[no_mangle]
pub unsafe extern "C" fn fg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static description of a status code. The returned pointer is valid
/// for the program lifetime; do not free it.
#[no_mangle]
pub extern "C" fn fg_status_message(status: FgStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        FgStatus::FgOk => b"ok\0",
        FgStatus::FgNullArgument => b"null pointer argument\0",
        FgStatus::FgInvalidArgument => b"argument outside its domain\0",
        FgStatus::FgArithmetic => b"arithmetic failure\0",
        FgStatus::FgInsufficientPrecision => b"state too shallow for the request\0",
        FgStatus::FgCertification => b"certification failure\0",
        FgStatus::FgCorruptCheckpoint => b"corrupt checkpoint\0",
        FgStatus::FgIo => b"input/output failure\0",
        FgStatus::FgText => b"invalid text encoding\0",
        FgStatus::FgPanic => b"panic caught at the boundary\0",
    };
    msg.as_ptr().cast()
}

/// Detail message for the most recent failure on the calling thread, or
/// null if none. The pointer is valid until the next failing call on
/// the same thread; do not free it.
#[no_mangle]
pub extern "C" fn fg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|c| c.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
