//! C ABI over `lsc_core`.
//!
//! Every function returns an [`LscStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`lsc_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lsc_core::cellgraph::{build_graph, CellGraph, ConductanceRule, GraphOptions, RegionSelector};
use lsc_core::geometry::{hausdorff_dimension, validate_lsc};
use lsc_core::potential::{effective_resistance, poincare_constant, EnergyForm, Resistance, Weighting};
use lsc_core::{catalog, claims, ifs_file, Error, IFSystem};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownSystem = 3,
    Parse = 4,
    BudgetExceeded = 5,
    Unvalidated = 6,
    Disconnected = 7,
    NonConvergence = 8,
    BufferTooSmall = 9,
    Computation = 10,
    Panic = 11,
}

/// Opaque system handle.
pub struct LscSystem {
    inner: IFSystem,
}

/// Opaque cell graph handle with its energy form.
pub struct LscGraph {
    graph: CellGraph,
    form: EnergyForm,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> LscStatus {
    match e {
        Error::UnknownSystem(_) => LscStatus::UnknownSystem,
        Error::Parse(_) | Error::FileFormat { .. } => LscStatus::Parse,
        Error::BudgetExceeded { .. } => LscStatus::BudgetExceeded,
        Error::Unvalidated(_) => LscStatus::Unvalidated,
        Error::Disconnected => LscStatus::Disconnected,
        Error::NonConvergence { .. } => LscStatus::NonConvergence,
        Error::InvalidSet(_) | Error::IndexOutOfRange { .. } | Error::InvalidRadicand(_) => LscStatus::InvalidArgument,
        _ => LscStatus::Computation,
    }
}

struct Fail(LscStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LscStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LscStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            LscStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(LscStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(LscStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lsc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lsc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a catalog system (`sc8`, `carpet104`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_system_from_catalog(name: *const c_char, out: *mut *mut LscSystem) -> LscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let sys = catalog::build(str_arg(name, "name")?)?;
        *out = Box::into_raw(Box::new(LscSystem { inner: sys }));
        Ok(())
    })
}

/// Parses a system from IFS file text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_system_from_ifs_text(text: *const c_char, out: *mut *mut LscSystem) -> LscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let sys = ifs_file::parse_ifs(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(LscSystem { inner: sys }));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lsc_system_free(sys: *mut LscSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_system_map_count(sys: *const LscSystem, out: *mut usize) -> LscStatus {
    guard(|| {
        let sys = ref_arg(sys, "sys")?;
        *out_arg(out, "out")? = sys.inner.len();
        Ok(())
    })
}

/// Sets `*passed` to 1 if every axiom holds exactly, else 0.
///
/// # Safety
/// `sys` must be a live handle and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_system_validate(sys: *const LscSystem, passed: *mut c_int) -> LscStatus {
    guard(|| {
        let sys = ref_arg(sys, "sys")?;
        let passed = out_arg(passed, "passed")?;
        *passed = c_int::from(validate_lsc(&sys.inner)?.all_passed());
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_system_dimension(sys: *const LscSystem, tol: f64, out: *mut f64) -> LscStatus {
    guard(|| {
        let sys = ref_arg(sys, "sys")?;
        let out = out_arg(out, "out")?;
        *out = hausdorff_dimension(&sys.inner, tol)?.dimension;
        Ok(())
    })
}

/// Builds the level-`level` cell graph. `rule` is `unit`, `theta:<x>` or
/// null for unit conductances; `corner_edges` nonzero adds point contacts.
///
/// # Safety
/// `sys` must be a live handle, `rule` null or NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lsc_graph_build(
    sys: *const LscSystem,
    level: usize,
    rule: *const c_char,
    corner_edges: c_int,
    out: *mut *mut LscGraph,
) -> LscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let sys = ref_arg(sys, "sys")?;
        let rule = if rule.is_null() { ConductanceRule::Unit } else { ConductanceRule::parse(str_arg(rule, "rule")?)? };
        let options = GraphOptions { rule, corner_edges: corner_edges != 0, ..GraphOptions::default() };
        let graph = build_graph(&sys.inner, level, options)?;
        let form = EnergyForm::from_graph(&graph);
        *out = Box::into_raw(Box::new(LscGraph { graph, form }));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lsc_graph_free(g: *mut LscGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lsc_graph_size(g: *const LscGraph, vertices: *mut usize, edges: *mut usize) -> LscStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        *out_arg(vertices, "vertices")? = g.graph.vertex_count();
        *out_arg(edges, "edges")? = g.graph.edges.len();
        Ok(())
    })
}

/// Effective resistance between two selectors (`edge:left`, `prefix:1`,
/// ...). Disconnected sets give `*infinite = 1` and `*out = 0`.
///
/// # Safety
/// `g` must be a live handle, selectors NUL-terminated, out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn lsc_graph_resistance(
    g: *const LscGraph,
    from: *const c_char,
    to: *const c_char,
    tol: f64,
    out: *mut f64,
    infinite: *mut c_int,
) -> LscStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        let out = out_arg(out, "out")?;
        let infinite = out_arg(infinite, "infinite")?;
        let radicand = g.graph.radicand;
        let a = g.graph.select(&RegionSelector::parse(str_arg(from, "from")?, radicand)?);
        let b = g.graph.select(&RegionSelector::parse(str_arg(to, "to")?, radicand)?);
        match effective_resistance(&g.form, &a, &b, tol)?.resistance {
            Resistance::Finite(r) => {
                *out = r;
                *infinite = 0;
            }
            Resistance::Infinite => {
                *out = 0.0;
                *infinite = 1;
            }
        }
        Ok(())
    })
}

/// Poincare constant with uniform cell weights.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_graph_poincare(g: *const LscGraph, out: *mut f64) -> LscStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        let out = out_arg(out, "out")?;
        *out = poincare_constant(&g.form, &Weighting::Uniform)?.lambda;
        Ok(())
    })
}

/// Writes the contradiction certificate as NUL-terminated text. `*needed`
/// receives the required size including the terminator; if `capacity` is
/// smaller, nothing is written and `BufferTooSmall` is returned.
///
/// # Safety
/// `sys` must be a live handle, `buf` valid for `capacity` bytes (or null
/// with `capacity` 0), `needed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsc_claims_certificate(
    sys: *const LscSystem,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> LscStatus {
    guard(|| {
        let sys = ref_arg(sys, "sys")?;
        let needed = out_arg(needed, "needed")?;
        let text = claims::run_claims(&sys.inner)?.certificate.text();
        *needed = text.len() + 1;
        if capacity < text.len() + 1 {
            return Err(Fail(LscStatus::BufferTooSmall, format!("certificate needs {} bytes", text.len() + 1)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}
