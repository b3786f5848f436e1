//! C interface to `udp6-core`.
//!
//! Objects are opaque handles created and destroyed by this library.
//! Every fallible call returns a [`Udp6Status`]; on failure the message is
//! available from [`udp6_last_error_message`] on the same thread.
//! Strings returned through out-pointers are owned by the caller and must be
//! released with [`udp6_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use udp6_core::evolution::{evolve, EvolutionConfig};
use udp6_core::table::verify_table;
use udp6_core::tropical::parse_rat;
use udp6_core::udp6::check_constraint;
use udp6_core::{Error, Params, ParityPair, Sign, SolutionTable, StatePair};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Udp6Status {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Constraint = 4,
    InvalidArgument = 5,
    OutOfRange = 6,
    NoContinuation = 7,
    Panic = 8,
}

/// Parameters of the system.
pub struct Udp6Params(Params);

/// Result of an evolution: one or more solution tables.
pub struct Udp6BranchSet {
    branches: Vec<SolutionTable>,
    truncated: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::default());
}

fn status_of(e: &Error) -> Udp6Status {
    match e {
        Error::Constraint { .. } | Error::SignConstraint => Udp6Status::Constraint,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => Udp6Status::Parse,
        Error::NoContinuation(_) => Udp6Status::NoContinuation,
        _ => Udp6Status::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (Udp6Status, String)>) -> Udp6Status {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Udp6Status::Ok,
        Ok(Err((st, msg))) => {
            set_error(msg);
            st
        }
        Err(_) => {
            set_error("internal panic");
            Udp6Status::Panic
        }
    }
}

fn core_err(e: Error) -> (Udp6Status, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (Udp6Status, String) {
    (Udp6Status::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (Udp6Status, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (Udp6Status::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> Result<*mut c_char, (Udp6Status, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (Udp6Status::Panic, "output contained NUL".into()))
}

fn sign_of(v: i8) -> Result<Sign, (Udp6Status, String)> {
    Sign::from_i64(v.into()).map_err(|e| (Udp6Status::InvalidArgument, e.to_string()))
}

/// Parses a params JSON object (`q`, `a1`..`a4`, `b1`..`b4`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn udp6_params_from_json(json: *const c_char, out: *mut *mut Udp6Params) -> Udp6Status {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = Params::from_json_str(read_str(json, "json")?).map_err(core_err)?;
        *out = Box::into_raw(Box::new(Udp6Params(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`udp6_params_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn udp6_params_free(p: *mut Udp6Params) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Writes whether `B1+B2+A3+A4 = Q+A1+A2+B3+B4` holds.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn udp6_check_constraint(p: *const Udp6Params, holds: *mut bool) -> Udp6Status {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let holds = holds.as_mut().ok_or_else(|| null("holds"))?;
        *holds = check_constraint(&p.0);
        Ok(())
    })
}

/// Enumerates every branch from `(y, z)` at index `m0` over `[m_min, m_max]`.
/// Signs are `+1` or `-1`; amplitudes are rational strings such as `"43"`
/// or `"7/2"`. `max_branches` of 0 selects the default cap.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn udp6_evolve(
    p: *const Udp6Params,
    m0: i64,
    y_sign: i8,
    y_amp: *const c_char,
    z_sign: i8,
    z_amp: *const c_char,
    m_min: i64,
    m_max: i64,
    max_branches: usize,
    out: *mut *mut Udp6BranchSet,
) -> Udp6Status {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let y = ParityPair::new(
            sign_of(y_sign)?,
            parse_rat(read_str(y_amp, "y_amp")?).map_err(core_err)?,
        );
        let z = ParityPair::new(
            sign_of(z_sign)?,
            parse_rat(read_str(z_amp, "z_amp")?).map_err(core_err)?,
        );
        let mut cfg = EvolutionConfig::window(m_min, m_max);
        if max_branches > 0 {
            cfg = cfg.with_max_branches(max_branches);
        }
        let tree = evolve(&p.0, &StatePair::new(m0, y, z), &cfg).map_err(core_err)?;
        *out = Box::into_raw(Box::new(Udp6BranchSet {
            branches: tree.branches,
            truncated: tree.truncated,
        }));
        Ok(())
    })
}

/// Number of branches, or 0 for null.
///
/// # Safety
/// `b` must come from [`udp6_evolve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn udp6_branches_count(b: *const Udp6BranchSet) -> usize {
    b.as_ref().map_or(0, |b| b.branches.len())
}

/// Whether the branch cap cut the enumeration short.
///
/// # Safety
/// `b` must come from [`udp6_evolve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn udp6_branches_truncated(b: *const Udp6BranchSet) -> bool {
    b.as_ref().is_some_and(|b| b.truncated)
}

/// Branch `k` as CSV with header `m,sy,Y,sz,Z`.
///
/// # Safety
/// `b` must come from [`udp6_evolve`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn udp6_branches_to_csv(b: *const Udp6BranchSet, k: usize, out: *mut *mut c_char) -> Udp6Status {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let b = b.as_ref().ok_or_else(|| null("branches"))?;
        let t = b
            .branches
            .get(k)
            .ok_or_else(|| (Udp6Status::OutOfRange, format!("branch {k} of {}", b.branches.len())))?;
        *out = to_c_string(t.to_csv_string())?;
        Ok(())
    })
}

/// # Safety
/// `b` must come from [`udp6_evolve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn udp6_branches_free(b: *mut Udp6BranchSet) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Checks a CSV table against both equations and writes the number of
/// failing `(m, equation)` pairs.
///
/// # Safety
/// Pointers must be valid; `csv` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn udp6_verify_csv(p: *const Udp6Params, csv: *const c_char, failures: *mut usize) -> Udp6Status {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let failures = failures.as_mut().ok_or_else(|| null("failures"))?;
        let t = SolutionTable::read_csv(read_str(csv, "csv")?.as_bytes()).map_err(core_err)?;
        *failures = verify_table(&p.0, &t).map_err(core_err)?.len();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn udp6_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn udp6_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
