//! C ABI surface: opaque handles over finite systems and relations, error
//! codes, and JSON-in/JSON-out entry points for classification, synthesis
//! and concretization checks.
//!
//! Conventions: every function returns an `SrStatus` code; results come back
//! through out-pointers. Strings are NUL-terminated UTF-8 owned by this
//! library and must be released with `sr_string_free`. On any failure the
//! thread-local message from `sr_last_error_message` describes the cause.

use libc::c_char;
use simrel::io;
use simrel::relation::{check_relation, classify, BinaryRelation, RelationType};
use simrel::synthesis::{synthesize_reach, synthesize_safety, Synthesis};
use simrel::system::FiniteSystem;
use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    SrOk = 0,
    SrNullArgument = 1,
    SrInvalidUtf8 = 2,
    SrParseError = 3,
    SrInvalidArgument = 4,
    SrInfeasible = 5,
    SrInternalError = 6,
}

/// Relation type selectors for `sr_check_relation`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrRelationType {
    SrAsr = 0,
    SrAsrb = 1,
    SrAsrbb = 2,
    SrMcr = 3,
    SrFrr = 4,
}

impl From<SrRelationType> for RelationType {
    fn from(t: SrRelationType) -> RelationType {
        match t {
            SrRelationType::SrAsr => RelationType::Asr,
            SrRelationType::SrAsrb => RelationType::Asrb,
            SrRelationType::SrAsrbb => RelationType::Asrbb,
            SrRelationType::SrMcr => RelationType::Mcr,
            SrRelationType::SrFrr => RelationType::Frr,
        }
    }
}

/// Opaque handle to a finite simple system.
pub struct SrSystem {
    inner: FiniteSystem,
}

/// Opaque handle to a binary relation between two systems' state spaces.
pub struct SrRelation {
    inner: BinaryRelation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &simrel::Error) -> SrStatus {
    match err {
        simrel::Error::Parse(_) => SrStatus::SrParseError,
        simrel::Error::Io(_) => SrStatus::SrParseError,
        _ => SrStatus::SrInvalidArgument,
    }
}

/// Last error message for this thread; valid until the next failing call.
/// The pointer must not be freed.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, SrStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(SrStatus::SrNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SrStatus::SrInvalidUtf8
    })
}

unsafe fn handle_arg<'a, T>(ptr: *const T) -> Result<&'a T, SrStatus> {
    if ptr.is_null() {
        set_error("null handle argument");
        return Err(SrStatus::SrNullArgument);
    }
    Ok(&*ptr)
}

fn out_string(s: String, out: *mut *mut c_char) -> SrStatus {
    let c = match CString::new(s) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL byte");
            return SrStatus::SrInternalError;
        }
    };
    unsafe { *out = c.into_raw() };
    SrStatus::SrOk
}

fn guarded(f: impl FnOnce() -> SrStatus) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SrStatus::SrInternalError
        }
    }
}

/// Parses a simple system from its JSON form into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_system_from_json(
    json: *const c_char,
    out: *mut *mut SrSystem,
) -> SrStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null out pointer");
            return SrStatus::SrNullArgument;
        }
        let text = match utf8_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match io::parse_system(text).and_then(io::SystemFile::simple) {
            Ok(sys) => {
                *out = Box::into_raw(Box::new(SrSystem { inner: sys }));
                SrStatus::SrOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `sys` must be a pointer from `sr_system_from_json`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_system_free(sys: *mut SrSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of states of the system.
///
/// # Safety
/// `sys` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sr_system_num_states(
    sys: *const SrSystem,
    out: *mut usize,
) -> SrStatus {
    guarded(|| {
        let sys = match handle_arg(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out.is_null() {
            set_error("null out pointer");
            return SrStatus::SrNullArgument;
        }
        *out = sys.inner.states.len();
        SrStatus::SrOk
    })
}

/// Parses a relation given as `{"pairs": [[l1, l2], ...]}` against the state
/// labels of the two systems.
///
/// # Safety
/// All pointers must be valid; `json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sr_relation_from_json(
    json: *const c_char,
    s1: *const SrSystem,
    s2: *const SrSystem,
    out: *mut *mut SrRelation,
) -> SrStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null out pointer");
            return SrStatus::SrNullArgument;
        }
        let (text, s1, s2) = match (utf8_arg(json), handle_arg(s1), handle_arg(s2)) {
            (Ok(t), Ok(a), Ok(b)) => (t, a, b),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        match io::parse_relation(text, &s1.inner.states, &s2.inner.states) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(SrRelation { inner: r }));
                SrStatus::SrOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a relation handle. Null is ignored.
///
/// # Safety
/// `rel` must be a pointer from `sr_relation_from_json`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_relation_free(rel: *mut SrRelation) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

/// Checks one relation type; `holds` receives 1 or 0.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sr_check_relation(
    s1: *const SrSystem,
    s2: *const SrSystem,
    rel: *const SrRelation,
    relation_type: SrRelationType,
    holds: *mut i32,
) -> SrStatus {
    guarded(|| {
        let (s1, s2, rel) = match (handle_arg(s1), handle_arg(s2), handle_arg(rel)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        if holds.is_null() {
            set_error("null out pointer");
            return SrStatus::SrNullArgument;
        }
        match check_relation(relation_type.into(), &s1.inner, &s2.inner, &rel.inner) {
            Ok(report) => {
                *holds = report.holds as i32;
                SrStatus::SrOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Runs all five relation checks and returns the report map as JSON.
///
/// # Safety
/// All pointers must be valid; free the result with `sr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sr_classify_json(
    s1: *const SrSystem,
    s2: *const SrSystem,
    rel: *const SrRelation,
    out_json: *mut *mut c_char,
) -> SrStatus {
    guarded(|| {
        let (s1, s2, rel) = match (handle_arg(s1), handle_arg(s2), handle_arg(rel)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        if out_json.is_null() {
            set_error("null out pointer");
            return SrStatus::SrNullArgument;
        }
        match classify(&s1.inner, &s2.inner, &rel.inner) {
            Ok(reports) => match serde_json::to_string(&reports) {
                Ok(s) => out_string(s, out_json),
                Err(e) => {
                    set_error(&e.to_string());
                    SrStatus::SrInternalError
                }
            },
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Synthesizes a safety (`bound < 0`) or bounded-reach (`bound >= 0`)
/// controller over the given state labels and returns its JSON dump.
/// Fails with `SrInfeasible` when no controller exists.
///
/// # Safety
/// All pointers must be valid; `states_json` is a JSON array of labels;
/// free the result with `sr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sr_synthesize_json(
    sys: *const SrSystem,
    states_json: *const c_char,
    bound: i64,
    out_json: *mut *mut c_char,
) -> SrStatus {
    guarded(|| {
        let (sys, text) = match (handle_arg(sys), utf8_arg(states_json)) {
            (Ok(s), Ok(t)) => (s, t),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        if out_json.is_null() {
            set_error("null out pointer");
            return SrStatus::SrNullArgument;
        }
        let labels: Vec<String> = match serde_json::from_str(text) {
            Ok(l) => l,
            Err(e) => {
                set_error(&e.to_string());
                return SrStatus::SrParseError;
            }
        };
        let mut set = BTreeSet::new();
        for l in &labels {
            match sys.inner.state_index(l) {
                Some(i) => {
                    set.insert(i);
                }
                None => {
                    set_error(&format!("unknown state label `{l}`"));
                    return SrStatus::SrInvalidArgument;
                }
            }
        }
        let outcome = if bound < 0 {
            synthesize_safety(&sys.inner, &set)
        } else {
            synthesize_reach(&sys.inner, &set, bound as usize)
        };
        match outcome {
            Ok(Synthesis::Controller(c)) => {
                let json = io::controller_to_json(&c, &sys.inner);
                out_string(io::to_pretty(&json), out_json)
            }
            Ok(Synthesis::Infeasible { reason }) => {
                set_error(&reason);
                SrStatus::SrInfeasible
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
