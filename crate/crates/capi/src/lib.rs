//! C ABI over the icbound library.
//!
//! Handles are opaque pointers owned by the library; every fallible call
//! returns an [`IcbStatus`] and writes results through out-pointers.  The
//! message for the most recent error on the calling thread is available via
//! [`icb_last_error_message`].

use icbound::bounds::ic_lower_bound_eq;
use icbound::graph::{gk_common_information, CharGraph};
use icbound::prob::JointPMF;
use icbound::protocol::{transcript_distribution, ProtocolSpec};
use icbound::wyner::{
    achievability_search, brute_force_oracle, eq_sup_closed_form, relaxed_sup_upper_bound,
    OracleConfig, SearchConfig,
};
use icbound::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input text failed to parse or validate.
    ParseError = 3,
    /// Arguments were structurally invalid (wrong arity, unknown name, ...).
    InvalidArgument = 4,
    /// The requested computation is infeasible or uncertified.
    Infeasible = 5,
    /// Instance exceeds the exhaustive-enumeration guards.
    TooLarge = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(e: &Error) -> IcbStatus {
    let msg = CString::new(e.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    match e {
        Error::Parse(_) | Error::Io(_) | Error::NotAProbability(_) => IcbStatus::ParseError,
        Error::UnknownVariable(_)
        | Error::OverlappingVariableSets(_)
        | Error::WrongArity(_)
        | Error::BadK(_)
        | Error::UnknownProtocol(_)
        | Error::InconsistentInputs(_)
        | Error::ProtocolShape(_) => IcbStatus::InvalidArgument,
        Error::TooLarge(_) | Error::TooLargeForOracle(_) | Error::DepthExceeded(_, _) => {
            IcbStatus::TooLarge
        }
        _ => IcbStatus::Infeasible,
    }
}

/// Message for the most recent error on this thread.  The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn icb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// An owned, validated joint distribution.
pub struct IcbPmf {
    inner: JointPMF,
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, IcbStatus> {
    if ptr.is_null() {
        return Err(IcbStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| IcbStatus::InvalidUtf8)
}

unsafe fn out_ref<'a, T>(ptr: *mut T) -> Result<&'a mut T, IcbStatus> {
    ptr.as_mut().ok_or(IcbStatus::NullArgument)
}

fn pmf_ref<'a>(handle: *const IcbPmf) -> Result<&'a JointPMF, IcbStatus> {
    unsafe { handle.as_ref() }
        .map(|h| &h.inner)
        .ok_or(IcbStatus::NullArgument)
}

/// Parse and validate a distribution in the pmf file format.  On success
/// `*out` owns the handle; release it with `icb_pmf_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icb_pmf_parse(text: *const c_char, out: *mut *mut IcbPmf) -> IcbStatus {
    let out = match out_ref(out) {
        Ok(o) => o,
        Err(s) => return s,
    };
    let text = match cstr(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match JointPMF::parse(text).and_then(|p| p.validate()) {
        Ok(pmf) => {
            *out = Box::into_raw(Box::new(IcbPmf { inner: pmf }));
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Release a pmf handle.  Null is accepted.
///
/// # Safety
/// `handle` must have come from `icb_pmf_parse` and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn icb_pmf_free(handle: *mut IcbPmf) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Entropy (bits) of the marginal on the space-separated variable names.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_pmf_entropy(
    handle: *const IcbPmf,
    variables: *const c_char,
    out: *mut f64,
) -> IcbStatus {
    let (pmf, vars, out) = match (pmf_ref(handle), cstr(variables), out_ref(out)) {
        (Ok(p), Ok(v), Ok(o)) => (p, v, o),
        (a, b, c) => return a.err().or(b.err()).or(c.err()).unwrap(),
    };
    let names: Vec<&str> = vars.split_whitespace().collect();
    match pmf.entropy(&names) {
        Ok(h) => {
            *out = h;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Mutual information I(a; b) in bits between two space-separated variable
/// groups.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_pmf_mutual_information(
    handle: *const IcbPmf,
    group_a: *const c_char,
    group_b: *const c_char,
    out: *mut f64,
) -> IcbStatus {
    let (pmf, a, b) = match (pmf_ref(handle), cstr(group_a), cstr(group_b)) {
        (Ok(p), Ok(a), Ok(b)) => (p, a, b),
        (p, a, b) => return p.err().or(a.err()).or(b.err()).unwrap(),
    };
    let out = match out_ref(out) {
        Ok(o) => o,
        Err(s) => return s,
    };
    let an: Vec<&str> = a.split_whitespace().collect();
    let bn: Vec<&str> = b.split_whitespace().collect();
    match pmf.mutual_information(&an, &bn) {
        Ok(v) => {
            *out = v;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Number of maximal-biclique classes of a bivariate pmf.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_biclique_count(
    handle: *const IcbPmf,
    out: *mut usize,
) -> IcbStatus {
    let (pmf, out) = match (pmf_ref(handle), out_ref(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (p, o) => return p.err().or(o.err()).unwrap(),
    };
    match CharGraph::build(pmf).and_then(|g| g.maximal_bicliques()) {
        Ok(dec) => {
            *out = dec.num_classes();
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Gács–Körner common information and tension of a bivariate pmf.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_gk_common_information(
    handle: *const IcbPmf,
    ci: *mut f64,
    tension: *mut f64,
) -> IcbStatus {
    let (pmf, ci, tension) = match (pmf_ref(handle), out_ref(ci), out_ref(tension)) {
        (Ok(p), Ok(c), Ok(t)) => (p, c, t),
        (p, c, t) => return p.err().or(c.err()).or(t.err()).unwrap(),
    };
    match gk_common_information(pmf) {
        Ok(info) => {
            *ci = info.ci;
            *tension = info.tension;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Certified upper bound on sup H(U|Q) + H(V|Q) by the per-edge relaxation.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_sup_relax(handle: *const IcbPmf, out: *mut f64) -> IcbStatus {
    let (pmf, out) = match (pmf_ref(handle), out_ref(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (p, o) => return p.err().or(o.err()).unwrap(),
    };
    let r = CharGraph::build(pmf)
        .and_then(|g| g.maximal_bicliques())
        .and_then(|dec| relaxed_sup_upper_bound(pmf, &dec));
    match r {
        Ok(sup) => {
            *out = sup.value;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Feasible achieved value of the sup by the seeded penalty search, with the
/// witness residuals.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_sup_search(
    handle: *const IcbPmf,
    seed: u64,
    restarts: u32,
    value: *mut f64,
    marginal_residual: *mut f64,
    markov_residual: *mut f64,
) -> IcbStatus {
    let (pmf, value) = match (pmf_ref(handle), out_ref(value)) {
        (Ok(p), Ok(v)) => (p, v),
        (p, v) => return p.err().or(v.err()).unwrap(),
    };
    let (marg, markov) = match (out_ref(marginal_residual), out_ref(markov_residual)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return a.err().or(b.err()).unwrap(),
    };
    let cfg = SearchConfig {
        seed,
        restarts,
        ..SearchConfig::default()
    };
    let r = CharGraph::build(pmf)
        .and_then(|g| g.maximal_bicliques())
        .and_then(|dec| achievability_search(pmf, &Arc::new(dec), &cfg));
    match r {
        Ok(sup) => {
            *value = sup.value;
            *marg = sup.marginal_residual;
            *markov = sup.markov_residual;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Brute-force oracle value for tiny instances.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_sup_oracle(
    handle: *const IcbPmf,
    seed: u64,
    out: *mut f64,
) -> IcbStatus {
    let (pmf, out) = match (pmf_ref(handle), out_ref(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (p, o) => return p.err().or(o.err()).unwrap(),
    };
    let cfg = OracleConfig {
        seed,
        ..OracleConfig::default()
    };
    match brute_force_oracle(pmf, &cfg) {
        Ok(sup) => {
            *out = sup.value;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Closed-form sup for uniform k-ary equality.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icb_eq_sup_closed_form(k: u64, out: *mut f64) -> IcbStatus {
    let out = match out_ref(out) {
        Ok(o) => o,
        Err(s) => return s,
    };
    match eq_sup_closed_form(k) {
        Ok(v) => {
            *out = v;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Closed-form information-complexity lower bound for uniform k-ary
/// equality.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icb_eq_ic_lower_bound(k: u64, out: *mut f64) -> IcbStatus {
    let out = match out_ref(out) {
        Ok(o) => o,
        Err(s) => return s,
    };
    match ic_lower_bound_eq(k) {
        Ok(report) => {
            *out = report.ic_lower;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Exact information cost of a built-in protocol
/// (`ternary_eq` or `two_bit_eq_randomized`) on its canonical instance.
///
/// # Safety
/// Pointer arguments as in `icb_pmf_parse`.
#[no_mangle]
pub unsafe extern "C" fn icb_protocol_cost(name: *const c_char, out: *mut f64) -> IcbStatus {
    let (name, out) = match (cstr(name), out_ref(out)) {
        (Ok(n), Ok(o)) => (n, o),
        (n, o) => return n.err().or(o.err()).unwrap(),
    };
    let r = ProtocolSpec::builtin(name)
        .and_then(|(p, pmf, f)| transcript_distribution(&p, &pmf, &f))
        .and_then(|td| td.information_cost());
    match r {
        Ok(cost) => {
            *out = cost;
            IcbStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}
