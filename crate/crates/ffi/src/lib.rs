//! C interface to `bohr-core`.
//!
//! Systems are opaque handles built from JSON. Results come back as
//! NUL-terminated JSON strings owned by the caller, who releases them with
//! [`bohr_string_free`]. Every call returns a [`BohrStatus`]; on failure
//! [`bohr_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bohr_core::contexts::{PosetOptions, DEFAULT_POSET_CAP, DEFAULT_SEED};
use bohr_core::interval::RationalInterval;
use bohr_core::ks::KsConfig;
use bohr_core::lattice::SiteJson;
use bohr_core::report::{self, Report};
use bohr_core::system::{System, SystemDescription};
use bohr_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BohrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// Malformed JSON, unknown names, inconsistent dimensions.
    InvalidInput = 3,
    /// The input is well formed but violates a mathematical precondition.
    Domain = 4,
    /// A size cap or retry budget was exhausted.
    LimitExceeded = 5,
    /// An internal error; the library state is unaffected.
    Panic = 6,
}

/// A validated system with its context poset.
pub struct BohrSystem {
    inner: System,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn classify(e: &Error) -> BohrStatus {
    match e {
        Error::Input(_) | Error::Json(_) | Error::Io(_) | Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } => {
            BohrStatus::InvalidInput
        }
        Error::PosetTooLarge { .. } | Error::EnumerationTooLarge { .. } | Error::GenericElementFailed { .. } => {
            BohrStatus::LimitExceeded
        }
        _ => BohrStatus::Domain,
    }
}

struct Fail(BohrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(classify(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BohrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BohrStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            BohrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(BohrStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(BohrStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn sys_arg<'a>(p: *const BohrSystem) -> Result<&'a System, Fail> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| Fail(BohrStatus::NullArgument, "`system` is null".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(BohrStatus::NullArgument, format!("`{name}` is null")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior NUL").into_raw()
}

fn result_json(r: &Report) -> Result<String, Fail> {
    serde_json::to_string(&r.result).map_err(|e| Error::from(e).into())
}

fn interval(s: &str) -> Result<RationalInterval, Fail> {
    Ok(s.parse::<RationalInterval>()?)
}

/// Builds a system from its JSON description. On success `*out` owns a new
/// handle; release it with [`bohr_system_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bohr_system_from_json(json: *const c_char, out: *mut *mut BohrSystem) -> BohrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let desc = SystemDescription::from_json_str(str_arg(json, "json")?)?;
        let inner = desc.build(None)?;
        *out = Box::into_raw(Box::new(BohrSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// `system` must come from [`bohr_system_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn bohr_system_free(system: *mut BohrSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Number of contexts in the system's poset, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bohr_system_num_contexts(system: *const BohrSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.poset.len())
}

/// Poset report as JSON; `dot`, if not null, receives the Hasse diagram.
///
/// # Safety
/// `system` must be a live handle; `out` a valid pointer; `dot` null or valid.
#[no_mangle]
pub unsafe extern "C" fn bohr_poset(system: *const BohrSystem, out: *mut *mut c_char, dot: *mut *mut c_char) -> BohrStatus {
    guard(|| {
        let sys = sys_arg(system)?;
        let out = out_arg(out, "out")?;
        let r = report::poset(&sys.poset);
        *out = to_c(result_json(&r)?);
        if let Some(d) = dot.as_mut() {
            *d = to_c(r.dot);
        }
        Ok(())
    })
}

/// Daseinisation of a named observable at `interval` (`"r,s"`, with `-inf`
/// and `inf` allowed). `*warnings` receives the number of boundary ties.
///
/// # Safety
/// Pointer arguments must be valid; `warnings` may be null.
#[no_mangle]
pub unsafe extern "C" fn bohr_daseinise(
    system: *const BohrSystem,
    observable: *const c_char,
    interval_str: *const c_char,
    out: *mut *mut c_char,
    warnings: *mut usize,
) -> BohrStatus {
    guard(|| {
        let sys = sys_arg(system)?;
        let obs = str_arg(observable, "observable")?;
        let iv = interval(str_arg(interval_str, "interval")?)?;
        let out = out_arg(out, "out")?;
        let r = report::daseinise(sys, obs, &iv)?;
        *out = to_c(result_json(&r)?);
        if let Some(w) = warnings.as_mut() {
            *w = r.warnings.len();
        }
        Ok(())
    })
}

/// Truth value of "observable in interval" in a named state at stage `base`
/// (a context label, or null for the trivial context).
///
/// # Safety
/// Pointer arguments must be valid; `base` and `warnings` may be null.
#[no_mangle]
pub unsafe extern "C" fn bohr_pair(
    system: *const BohrSystem,
    observable: *const c_char,
    interval_str: *const c_char,
    state: *const c_char,
    base: *const c_char,
    out: *mut *mut c_char,
    warnings: *mut usize,
) -> BohrStatus {
    guard(|| {
        let sys = sys_arg(system)?;
        let obs = str_arg(observable, "observable")?;
        let iv = interval(str_arg(interval_str, "interval")?)?;
        let st = str_arg(state, "state")?;
        let base = opt_str_arg(base, "base")?;
        let out = out_arg(out, "out")?;
        let r = report::pair(sys, obs, &iv, st, base)?;
        *out = to_c(result_json(&r)?);
        if let Some(w) = warnings.as_mut() {
            *w = r.warnings.len();
        }
        Ok(())
    })
}

/// Searches the system's poset for a point. `*has_point` is 1 or 0.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bohr_ks(system: *const BohrSystem, out: *mut *mut c_char, has_point: *mut i32) -> BohrStatus {
    guard(|| {
        let sys = sys_arg(system)?;
        let out = out_arg(out, "out")?;
        let hp = out_arg(has_point, "has_point")?;
        let r = report::ks(&sys.poset);
        *out = to_c(result_json(&r)?);
        *hp = i32::from(!r.no_point);
        Ok(())
    })
}

/// As [`bohr_ks`] for a configuration `{"dim": n, "bases": [...]}`.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bohr_ks_config(config: *const c_char, out: *mut *mut c_char, has_point: *mut i32) -> BohrStatus {
    guard(|| {
        let cfg: KsConfig = serde_json::from_str(str_arg(config, "config")?).map_err(Error::from)?;
        let out = out_arg(out, "out")?;
        let hp = out_arg(has_point, "has_point")?;
        let poset = cfg.poset(&PosetOptions { cap: DEFAULT_POSET_CAP, seed: DEFAULT_SEED })?;
        let r = report::ks(&poset);
        *out = to_c(result_json(&r)?);
        *hp = i32::from(!r.no_point);
        Ok(())
    })
}

/// Frame of a site given as JSON.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn bohr_site_frame(site: *const c_char, out: *mut *mut c_char) -> BohrStatus {
    guard(|| {
        let json: SiteJson = serde_json::from_str(str_arg(site, "site")?).map_err(Error::from)?;
        let out = out_arg(out, "out")?;
        *out = to_c(result_json(&report::site_frame(&json)?)?);
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn bohr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bohr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn bohr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
