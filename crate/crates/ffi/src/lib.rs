//! C ABI over the qnetopt library.
//!
//! Networks and fronts are opaque handles created and released through this
//! interface. Every fallible call returns a [`QnStatus`]; on failure a
//! message is available from [`qn_last_error_message`] on the same thread.
//! Strings returned to the caller are released with [`qn_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, c_double, size_t};

use qnetopt::generate::{generate_network, GenParams};
use qnetopt::metrics::{step_size, CurveParams};
use qnetopt::model::{build_memory_utilization_graph, hop_distance, NodeId, QuantumNetwork};
use qnetopt::quantum::{optimize_quantum_layer, FrontReport, QuantumConfig};
use qnetopt::schedule::link_weight;
use qnetopt::tree::NodeSets;
use qnetopt::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    InvalidNetwork = 4,
    Domain = 5,
    Unreachable = 6,
    BudgetExceeded = 7,
    OutOfRange = 8,
    Internal = 9,
    Panic = 10,
}

/// Opaque network handle.
pub struct QnNetwork {
    inner: QuantumNetwork,
}

/// Opaque Pareto front handle.
pub struct QnFront {
    report: FrontReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QnStatus {
    match e {
        Error::InvalidLevel(_)
        | Error::InvalidLink(_)
        | Error::InvalidNetwork(_)
        | Error::Mapping(_) => QnStatus::InvalidNetwork,
        Error::Domain(_)
        | Error::Overflow(_)
        | Error::DimensionMismatch { .. }
        | Error::Model(_) => QnStatus::Domain,
        Error::Unreachable(_) | Error::EmptyFeasibleSet(_) => QnStatus::Unreachable,
        Error::BudgetExceeded(_) | Error::Truncated(_) => QnStatus::BudgetExceeded,
        Error::Json(_) | Error::Csv(_) | Error::Usage(_) | Error::Io(_) => QnStatus::InvalidInput,
        Error::Internal(_) => QnStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), (QnStatus, String)>>(f: F) -> QnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside qnetopt".into());
            QnStatus::Panic
        }
    }
}

fn lib<T>(r: qnetopt::Result<T>) -> Result<T, (QnStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QnStatus, String) {
    (QnStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QnStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (QnStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> Result<*mut c_char, (QnStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (QnStatus::Internal, "string contains nul".into()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a network from JSON.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_network_from_json(
    json: *const c_char,
    out: *mut *mut QnNetwork,
) -> QnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let inner = lib(QuantumNetwork::from_json_str(text))?;
        *out = Box::into_raw(Box::new(QnNetwork { inner }));
        Ok(())
    })
}

/// Generates a seeded chain network with default link ranges.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_network_generate(
    nodes: size_t,
    switchers: size_t,
    levels: u32,
    seed: u64,
    out: *mut *mut QnNetwork,
) -> QnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = GenParams {
            nodes,
            switchers,
            levels,
            ..GenParams::default()
        };
        let inner = lib(generate_network(&params, seed))?;
        *out = Box::into_raw(Box::new(QnNetwork { inner }));
        Ok(())
    })
}

/// # Safety
/// `net` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qn_network_free(net: *mut QnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_network_node_count(
    net: *const QnNetwork,
    out: *mut size_t,
) -> QnStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = net.inner.nodes().len();
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_network_link_count(
    net: *const QnNetwork,
    out: *mut size_t,
) -> QnStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = net.inner.links().len();
        Ok(())
    })
}

/// Serializes a network; release the result with [`qn_string_free`].
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_network_to_json(
    net: *const QnNetwork,
    out: *mut *mut c_char,
) -> QnStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(lib(net.inner.to_json_string())?)?;
        Ok(())
    })
}

/// Runs the quantum-layer search between two node ids with default
/// parameters.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_quantum_optimize(
    net: *const QnNetwork,
    source: u32,
    destination: u32,
    iterations: size_t,
    seed: u64,
    out: *mut *mut QnFront,
) -> QnStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let graph = build_memory_utilization_graph(&net.inner);
        let sets = NodeSets::single(NodeId(source), NodeId(destination));
        let config = QuantumConfig {
            iterations,
            seed,
            ..QuantumConfig::default()
        };
        let run = lib(optimize_quantum_layer(
            &graph,
            &net.inner,
            &sets,
            NodeId(destination),
            &config,
        ))?;
        let report = run.report(NodeId(source), NodeId(destination));
        *out = Box::into_raw(Box::new(QnFront { report }));
        Ok(())
    })
}

/// # Safety
/// `front` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qn_front_free(front: *mut QnFront) {
    if !front.is_null() {
        drop(Box::from_raw(front));
    }
}

/// # Safety
/// `front` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_front_len(front: *const QnFront, out: *mut size_t) -> QnStatus {
    guard(|| {
        let front = front.as_ref().ok_or_else(|| null("front"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = front.report.front.len();
        Ok(())
    })
}

/// Objectives of member `index`: storage time, throughput and path length.
///
/// # Safety
/// `front` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_front_objectives(
    front: *const QnFront,
    index: size_t,
    storage_time: *mut c_double,
    throughput: *mut c_double,
    path_length: *mut u32,
) -> QnStatus {
    guard(|| {
        let front = front.as_ref().ok_or_else(|| null("front"))?;
        let m = front.report.front.get(index).ok_or_else(|| {
            (
                QnStatus::OutOfRange,
                format!(
                    "index {index} out of range for {} members",
                    front.report.front.len()
                ),
            )
        })?;
        *storage_time.as_mut().ok_or_else(|| null("storage_time"))? = m.t_s;
        *throughput.as_mut().ok_or_else(|| null("throughput"))? = m.b_f;
        *path_length.as_mut().ok_or_else(|| null("path_length"))? = m.path_len;
        Ok(())
    })
}

/// Serializes a front; release the result with [`qn_string_free`].
///
/// # Safety
/// `front` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_front_to_json(
    front: *const QnFront,
    out: *mut *mut c_char,
) -> QnStatus {
    guard(|| {
        let front = front.as_ref().ok_or_else(|| null("front"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(lib(front.report.to_json())?)?;
        Ok(())
    })
}

/// Chain hops spanned by a link of `level`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_hop_distance(level: u32, out: *mut u64) -> QnStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(hop_distance(level))?;
        Ok(())
    })
}

/// Time units a link of `fidelity` needs per cycle.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_link_weight(
    fidelity: c_double,
    f_max: c_double,
    out: *mut u32,
) -> QnStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(link_weight(fidelity, f_max))?;
        Ok(())
    })
}

/// Step size at restriction value `f` and index `j`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_step_size(
    f: c_double,
    j: u64,
    phi_min: c_double,
    phi_max: c_double,
    out: *mut c_double,
) -> QnStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let params = CurveParams {
            phi_min,
            phi_max,
            omega: 1.0,
            j_p: 1.0,
        };
        lib(params.validate())?;
        *out = lib(step_size(f, j, &params))?;
        Ok(())
    })
}
