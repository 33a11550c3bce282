//! C ABI over the commwheel library.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`CwStatus`] and, on failure, leaves a message retrievable with
//! [`cw_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use commwheel::io::{load_network, save_network, ResultFile};
use commwheel::network::{generate_honeycomb_family, generate_random, Network, NodeClass};
use commwheel::protocol::{run_simulation, Interleaving, LocalizationResult, SimConfig};
use commwheel::trilateration::sweep_all_triangles;
use commwheel::wheel::classify_by_wheels;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    NoLeader = 3,
    Internal = 4,
    OutOfRange = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwClass {
    Boundary = 0,
    IsolatedWeak = 1,
    Weak = 2,
    Strong = 3,
}

impl From<NodeClass> for CwClass {
    fn from(c: NodeClass) -> Self {
        match c {
            NodeClass::Boundary => CwClass::Boundary,
            NodeClass::IsolatedWeaklyInterior => CwClass::IsolatedWeak,
            NodeClass::NonIsolatedWeaklyInterior => CwClass::Weak,
            NodeClass::StronglyInterior => CwClass::Strong,
        }
    }
}

/// A unit disk graph with ground-truth positions.
pub struct CwNetwork(Network);

/// Outcome of one protocol run.
pub struct CwResult {
    run: LocalizationResult,
    file: String,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<CwStatus, (CwStatus, String)>) -> CwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == CwStatus::Ok {
                set_error("");
            }
            status
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside commwheel");
            CwStatus::Internal
        }
    }
}

fn null(what: &str) -> (CwStatus, String) {
    (CwStatus::NullArgument, format!("{what} is null"))
}

unsafe fn net_ref<'a>(net: *const CwNetwork) -> Result<&'a Network, (CwStatus, String)> {
    net.as_ref().map(|n| &n.0).ok_or_else(|| null("network"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse a network file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_network_from_json(json: *const c_char, out: *mut *mut CwNetwork) -> CwStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CwStatus::InvalidInput, e.to_string()))?;
        let net = load_network(text).map_err(|e| (CwStatus::InvalidInput, e.to_string()))?;
        put(out, CwNetwork(net));
        Ok(CwStatus::Ok)
    })
}

/// Uniform random deployment in a `width × height` region.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_network_generate_random(
    n: usize,
    width: f64,
    height: f64,
    r: f64,
    seed: u64,
    out: *mut *mut CwNetwork,
) -> CwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let net = generate_random(n, width, height, r, seed).map_err(|e| (CwStatus::InvalidInput, e.to_string()))?;
        put(out, CwNetwork(net));
        Ok(CwStatus::Ok)
    })
}

/// Member `k` of the honeycomb family.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_network_generate_honeycomb(k: usize, out: *mut *mut CwNetwork) -> CwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = generate_honeycomb_family(k).map_err(|e| (CwStatus::InvalidInput, e.to_string()))?;
        put(out, CwNetwork(report.network));
        Ok(CwStatus::Ok)
    })
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_network_len(net: *const CwNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.len())
}

/// Serialize to a network file. Free the string with [`cw_string_free`].
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_network_to_json(net: *const CwNetwork, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let net = net_ref(net)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(save_network(net));
        Ok(CwStatus::Ok)
    })
}

/// Write each node's wheel-based class into `classes`, which must hold
/// `len == cw_network_len(net)` entries, in ascending id order.
///
/// # Safety
/// `net` must be a live handle and `classes` point to `len` writable slots.
#[no_mangle]
pub unsafe extern "C" fn cw_network_classify(net: *const CwNetwork, classes: *mut CwClass, len: usize) -> CwStatus {
    guard(|| {
        let net = net_ref(net)?;
        if classes.is_null() {
            return Err(null("classes"));
        }
        if len != net.len() {
            return Err((
                CwStatus::OutOfRange,
                format!("buffer holds {len} entries, network has {}", net.len()),
            ));
        }
        let c = classify_by_wheels(net);
        let slots = std::slice::from_raw_parts_mut(classes, len);
        for (slot, &class) in slots.iter_mut().zip(&c.classes) {
            *slot = class.into();
        }
        Ok(CwStatus::Ok)
    })
}

/// Run the protocol. On `CW_STATUS_NO_LEADER` the result handle is still
/// written (with nothing localized) so its statistics can be inspected.
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_localize(
    net: *const CwNetwork,
    seed: u64,
    random_interleaving: bool,
    out: *mut *mut CwResult,
) -> CwStatus {
    guard(|| {
        let net = net_ref(net)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SimConfig {
            seed,
            interleaving: if random_interleaving {
                Interleaving::Random
            } else {
                Interleaving::Fifo
            },
            ..SimConfig::default()
        };
        let run = run_simulation(net, &cfg);
        let file = ResultFile::from_run(net, &run).to_json();
        let error = run.error.clone();
        put(out, CwResult { run, file });
        match error {
            Some(e) => Err((CwStatus::NoLeader, e.to_string())),
            None => Ok(CwStatus::Ok),
        }
    })
}

/// Number of localized nodes, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_result_localized_count(result: *const CwResult) -> usize {
    result.as_ref().map_or(0, |r| r.run.localized_count())
}

/// Position of the node at `index` (ascending id order) in the run's
/// global frame. `localized` is set to false and the coordinates left
/// untouched for unlocalized nodes.
///
/// # Safety
/// `result` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cw_result_position(
    result: *const CwResult,
    index: usize,
    x: *mut f64,
    y: *mut f64,
    localized: *mut bool,
) -> CwStatus {
    guard(|| {
        let result = result.as_ref().ok_or_else(|| null("result"))?;
        if x.is_null() || y.is_null() || localized.is_null() {
            return Err(null("output pointer"));
        }
        let slot = result.run.positions.get(index).ok_or_else(|| {
            (
                CwStatus::OutOfRange,
                format!("index {index} out of range for {} nodes", result.run.positions.len()),
            )
        })?;
        *localized = slot.is_some();
        if let Some(p) = slot {
            *x = p.x;
            *y = p.y;
        }
        Ok(CwStatus::Ok)
    })
}

/// The result file as JSON. Free the string with [`cw_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_result_to_json(result: *const CwResult, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let result = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(result.file.clone());
        Ok(CwStatus::Ok)
    })
}

/// Hex SHA-256 of the message trace. Free the string with [`cw_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_result_trace_hash(result: *const CwResult, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let result = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(result.run.trace.hash());
        Ok(CwStatus::Ok)
    })
}

/// Best and worst trilateration counts over every seed triangle.
///
/// # Safety
/// `net` must be a live handle; `best` and `worst` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cw_trilateration_sweep(net: *const CwNetwork, best: *mut usize, worst: *mut usize) -> CwStatus {
    guard(|| {
        let net = net_ref(net)?;
        if best.is_null() || worst.is_null() {
            return Err(null("output pointer"));
        }
        let stats = sweep_all_triangles(net);
        *best = stats.best;
        *worst = stats.worst;
        Ok(CwStatus::Ok)
    })
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_network_free(net: *mut CwNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_result_free(result: *mut CwResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
