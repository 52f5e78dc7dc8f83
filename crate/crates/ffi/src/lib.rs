//! C ABI over `graphsteer`.
//!
//! States are opaque `GsState` handles created by `gs_state_build` and
//! released with `gs_state_free`. Every fallible call returns a `GsStatus`;
//! on failure `gs_last_error_message` describes the error for the calling
//! thread. Mode indices are zero-based (A = 0).

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use graphsteer::{
    build_state, group_steering, log_negativity, symplectic_eigenvalues, transmittance_from_weight,
    Bipartition, CovarianceMatrix, Error, FamilyKind, StateFamily,
};

pub const GS_FAMILY_TRIPARTITE: u32 = 0;
pub const GS_FAMILY_FOURMODE: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Parameter outside its domain, e.g. T2 not in (0, 1).
    Domain = 2,
    /// Malformed input such as overlapping or out-of-range mode indices.
    Validation = 3,
    Numerical = 4,
    /// The output buffer is too short; the required length is still written.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// A pure Gaussian state of one of the two graph-state families.
pub struct GsState {
    kind: FamilyKind,
    t2: f64,
    r: f64,
    sigma: CovarianceMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: GsStatus, msg: impl Into<String>) -> GsStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> GsStatus {
    let status = match e {
        Error::Domain(_) => GsStatus::Domain,
        Error::Validation(_) => GsStatus::Validation,
        Error::NumericalDegeneracy(_) => GsStatus::Numerical,
    };
    fail(status, e.to_string())
}

/// Runs `f`, clearing the error slot first and turning panics into
/// `GsStatus::Internal`.
fn guard(f: impl FnOnce() -> GsStatus) -> GsStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(GsStatus::Internal, "panic inside graphsteer"),
    }
}

fn family(code: u32) -> Result<FamilyKind, GsStatus> {
    match code {
        GS_FAMILY_TRIPARTITE => Ok(FamilyKind::Tripartite),
        GS_FAMILY_FOURMODE => Ok(FamilyKind::FourMode),
        _ => Err(fail(
            GsStatus::Domain,
            format!("unknown family code {code}"),
        )),
    }
}

unsafe fn modes<'a>(ptr: *const usize, len: usize) -> Result<&'a [usize], GsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(fail(GsStatus::NullPointer, "mode array is null"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn state_ref<'a>(state: *const GsState) -> Result<&'a GsState, GsStatus> {
    state
        .as_ref()
        .ok_or_else(|| fail(GsStatus::NullPointer, "state handle is null"))
}

/// Copies `values` into `buf` when it fits; always stores the length.
unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize, written: *mut usize) -> GsStatus {
    if !written.is_null() {
        *written = values.len();
    }
    if len < values.len() {
        return fail(
            GsStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        );
    }
    if buf.is_null() {
        return fail(GsStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    GsStatus::Ok
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

/// Builds the network output state of family `family_code` (a `GS_FAMILY_*`
/// constant) at transmittance `t2` and squeezing `r`. On success `*out`
/// owns a new handle.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_state_build(
    family_code: u32,
    t2: f64,
    r: f64,
    out: *mut *mut GsState,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return fail(GsStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let kind = tri!(family(family_code));
        let fam = lib!(StateFamily::new(kind, t2, r));
        let sigma = lib!(build_state(&fam));
        *out = Box::into_raw(Box::new(GsState { kind, t2, r, sigma }));
        GsStatus::Ok
    })
}

/// Releases a handle from `gs_state_build`. Null is ignored.
///
/// # Safety
/// `state` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gs_state_free(state: *mut GsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Stores the number of modes, the transmittance and the squeezing of a
/// state. Any output pointer may be null.
///
/// # Safety
/// `state` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_state_info(
    state: *const GsState,
    n_modes: *mut usize,
    t2: *mut f64,
    r: *mut f64,
) -> GsStatus {
    guard(|| {
        let s = tri!(state_ref(state));
        if !n_modes.is_null() {
            *n_modes = s.kind.n_modes();
        }
        if !t2.is_null() {
            *t2 = s.t2;
        }
        if !r.is_null() {
            *r = s.r;
        }
        GsStatus::Ok
    })
}

/// Writes the 2n×2n covariance matrix in row-major order, quadratures
/// ordered (x_A, p_A, x_B, p_B, ...).
///
/// # Safety
/// `state` must be a live handle and `buf` valid for `len` doubles;
/// `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn gs_state_covariance(
    state: *const GsState,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> GsStatus {
    guard(|| {
        let s = tri!(state_ref(state));
        let m = s.sigma.matrix();
        let values: Vec<f64> = m.transpose().iter().copied().collect();
        copy_out(&values, buf, len, written)
    })
}

/// Symplectic eigenvalues, descending.
///
/// # Safety
/// As for `gs_state_covariance`.
#[no_mangle]
pub unsafe extern "C" fn gs_state_symplectic_eigenvalues(
    state: *const GsState,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> GsStatus {
    guard(|| {
        let s = tri!(state_ref(state));
        let nus = lib!(symplectic_eigenvalues(&s.sigma));
        copy_out(&nus, buf, len, written)
    })
}

/// Gaussian steering G from the `steering` modes to the `steered` modes.
/// `regularized` (may be null) reports whether a pseudo-inverse was used.
///
/// # Safety
/// `state` must be a live handle, the mode arrays valid for their lengths
/// and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_steering(
    state: *const GsState,
    steering: *const usize,
    n_steering: usize,
    steered: *const usize,
    n_steered: usize,
    value: *mut f64,
    regularized: *mut bool,
) -> GsStatus {
    guard(|| {
        let s = tri!(state_ref(state));
        let from = tri!(modes(steering, n_steering));
        let to = tri!(modes(steered, n_steered));
        if value.is_null() {
            return fail(GsStatus::NullPointer, "value is null");
        }
        let g = lib!(group_steering(&s.sigma, from, to));
        *value = g.value;
        if !regularized.is_null() {
            *regularized = g.regularized;
        }
        GsStatus::Ok
    })
}

/// Logarithmic negativity between mode sets `a` and `b`.
///
/// # Safety
/// As for `gs_steering`.
#[no_mangle]
pub unsafe extern "C" fn gs_log_negativity(
    state: *const GsState,
    a: *const usize,
    n_a: usize,
    b: *const usize,
    n_b: usize,
    value: *mut f64,
) -> GsStatus {
    guard(|| {
        let s = tri!(state_ref(state));
        let a = tri!(modes(a, n_a));
        let b = tri!(modes(b, n_b));
        if value.is_null() {
            return fail(GsStatus::NullPointer, "value is null");
        }
        let part = lib!(Bipartition::new(a.to_vec(), b.to_vec()));
        *value = lib!(log_negativity(&s.sigma, &part)).log_negativity;
        GsStatus::Ok
    })
}

/// Weight factor of a family member (C_BC for tripartite, C_A for fourmode).
///
/// # Safety
/// `weight` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_t2_to_weight(family_code: u32, t2: f64, weight: *mut f64) -> GsStatus {
    guard(|| {
        let kind = tri!(family(family_code));
        if weight.is_null() {
            return fail(GsStatus::NullPointer, "weight is null");
        }
        *weight = lib!(kind.weight(t2));
        GsStatus::Ok
    })
}

/// Inverse of `gs_t2_to_weight`.
///
/// # Safety
/// `t2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_weight_to_t2(family_code: u32, weight: f64, t2: *mut f64) -> GsStatus {
    guard(|| {
        let kind = tri!(family(family_code));
        if t2.is_null() {
            return fail(GsStatus::NullPointer, "t2 is null");
        }
        *t2 = lib!(transmittance_from_weight(kind, weight));
        GsStatus::Ok
    })
}

/// Message for the most recent failed call on this thread, or "" after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
