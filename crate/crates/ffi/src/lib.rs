//! C ABI over `floquet-core`.
//!
//! Every fallible call returns a [`FloquetStatus`]; on failure the message is
//! available from [`floquet_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new`/`*_compute`/`*_solve` calls and released with the
//! matching `*_free`. No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use floquet_core::engine::{
    effective_hamiltonian, solve_condition, u_cosine_closed, u_series, u_square_closed,
    ConditionSolution, EffectiveOptions, PulseFamily, SolveOptions, Target,
};
use floquet_core::models::{dipolar_couplings, SpinModel};
use floquet_core::pulses::{AveragingConvention, MomentTable, PulseProfile, PulseShape};
use floquet_core::FloquetError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloquetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    SingularCondition = 4,
    NoSolution = 5,
    NumericFailure = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloquetShape {
    Cosine = 0,
    Square = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloquetConvention {
    Subcycle = 0,
    FullCycle = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloquetTarget {
    Ising = 0,
    Xy = 1,
    Heisenberg = 2,
    /// Uses the `a` and `b` arguments.
    Custom = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloquetFamily {
    /// Closed form `(J0(4v) - 1) / 32`.
    Cosine = 0,
    /// Closed form `(sinc(2 pi v) - 1) / 16`.
    Square = 1,
    /// Truncated series over a moment table.
    Series = 2,
}

/// Opaque pulse profile.
pub struct FloquetProfile(PulseProfile);

/// Opaque table of pulse moments.
pub struct FloquetMomentTable(MomentTable);

/// Opaque result of a condition solve.
pub struct FloquetSolution(ConditionSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &FloquetError) -> FloquetStatus {
    match err {
        FloquetError::SingularCondition(_) => FloquetStatus::SingularCondition,
        FloquetError::SiteOutOfRange { .. }
        | FloquetError::DenseCapExceeded { .. }
        | FloquetError::TimeOutsideCycle { .. } => FloquetStatus::OutOfRange,
        FloquetError::InvalidArgument(_)
        | FloquetError::InvalidGraph(_)
        | FloquetError::Parse(_)
        | FloquetError::NotHermitian
        | FloquetError::Unsupported(_)
        | FloquetError::CyclicityViolation(_) => FloquetStatus::InvalidArgument,
        _ => FloquetStatus::NumericFailure,
    }
}

/// Runs `f`, recording errors and converting panics into [`FloquetStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (FloquetStatus, String)>) -> FloquetStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FloquetStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FloquetStatus::Panic
        }
    }
}

fn core<T>(r: floquet_core::Result<T>) -> Result<T, (FloquetStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (FloquetStatus, String) {
    (FloquetStatus::NullPointer, format!("{name} is NULL"))
}

fn convention(c: FloquetConvention) -> AveragingConvention {
    match c {
        FloquetConvention::Subcycle => AveragingConvention::Subcycle,
        FloquetConvention::FullCycle => AveragingConvention::FullCycle,
    }
}

fn into_handle<T>(value: T, out: *mut *mut T) {
    // SAFETY: callers check `out` for NULL first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn floquet_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string contains NUL"),
        };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next
/// call into the library on the same thread.
#[no_mangle]
pub extern "C" fn floquet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// `U(v)` for the cosine pulse, `(J0(4v) - 1) / 32`.
#[no_mangle]
pub extern "C" fn floquet_u_cosine_closed(v: f64) -> f64 {
    u_cosine_closed(v)
}

/// `U(v)` for the square pulse, `(sinc(2 pi v) - 1) / 16`.
#[no_mangle]
pub extern "C" fn floquet_u_square_closed(v: f64) -> f64 {
    u_square_closed(v)
}

/// Creates a two-subcycle profile driving global `sigma^1` then global `sigma^2`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn floquet_profile_new(
    shape: FloquetShape,
    strength: f64,
    subcycle_duration: f64,
    out: *mut *mut FloquetProfile,
) -> FloquetStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let shape = match shape {
            FloquetShape::Cosine => PulseShape::Cosine,
            FloquetShape::Square => PulseShape::Square,
        };
        let p = core(PulseProfile::global_xy(shape, strength, subcycle_duration))?;
        into_handle(FloquetProfile(p), out);
        Ok(())
    })
}

/// # Safety
/// `profile` must be NULL or a handle from [`floquet_profile_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn floquet_profile_free(profile: *mut FloquetProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Moments `overline{G^{2p}}` for `p = 1..p_max` under the given convention.
///
/// # Safety
/// `profile` must be a live profile handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_moments_compute(
    profile: *const FloquetProfile,
    p_max: usize,
    conv: FloquetConvention,
    out: *mut *mut FloquetMomentTable,
) -> FloquetStatus {
    guard(|| {
        let profile = profile.as_ref().ok_or_else(|| null("profile"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let table = core(profile.0.compute_moments(p_max, convention(conv)))?;
        into_handle(FloquetMomentTable(table), out);
        Ok(())
    })
}

/// Largest `p` stored in the table, or 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live moment-table handle.
#[no_mangle]
pub unsafe extern "C" fn floquet_moments_p_max(table: *const FloquetMomentTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.p_max())
}

/// # Safety
/// `table` must be a live moment-table handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_moments_get(
    table: *const FloquetMomentTable,
    p: usize,
    out: *mut f64,
) -> FloquetStatus {
    guard(|| {
        let table = table.as_ref().ok_or_else(|| null("table"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if p == 0 || p > table.0.p_max() {
            return Err((
                FloquetStatus::OutOfRange,
                format!("p = {p} outside 1..={}", table.0.p_max()),
            ));
        }
        *out = table.0.moment(p);
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or a live moment-table handle.
#[no_mangle]
pub unsafe extern "C" fn floquet_moments_free(table: *mut FloquetMomentTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Truncated series `U(v)` through `p_max` and the magnitude of the first dropped term.
///
/// # Safety
/// `table` must be a live moment-table handle; `out_value` writable; `out_tail` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_u_series(
    table: *const FloquetMomentTable,
    v: f64,
    p_max: usize,
    out_value: *mut f64,
    out_tail: *mut f64,
) -> FloquetStatus {
    guard(|| {
        let table = table.as_ref().ok_or_else(|| null("table"))?;
        let out_value = out_value.as_mut().ok_or_else(|| null("out_value"))?;
        let s = u_series(v, &table.0, p_max);
        *out_value = s.value;
        if let Some(t) = out_tail.as_mut() {
            *t = s.first_dropped;
        }
        Ok(())
    })
}

/// Solves the engineering condition at anisotropy `s`. `moments` and `p_max` are
/// used only for [`FloquetFamily::Series`]; `a` and `b` only for [`FloquetTarget::Custom`].
///
/// # Safety
/// `moments` must be NULL or a live moment-table handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_solve_condition(
    family: FloquetFamily,
    moments: *const FloquetMomentTable,
    p_max: usize,
    s: f64,
    target: FloquetTarget,
    a: f64,
    b: f64,
    out: *mut *mut FloquetSolution,
) -> FloquetStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let family = match family {
            FloquetFamily::Cosine => PulseFamily::Cosine,
            FloquetFamily::Square => PulseFamily::Square,
            FloquetFamily::Series => {
                let table = moments.as_ref().ok_or_else(|| null("moments"))?;
                PulseFamily::Series {
                    moments: table.0.clone(),
                    p_max,
                }
            }
        };
        let target = match target {
            FloquetTarget::Ising => Target::Ising,
            FloquetTarget::Xy => Target::Xy,
            FloquetTarget::Heisenberg => Target::Heisenberg,
            FloquetTarget::Custom => Target::Custom { a, b },
        };
        let sol = core(solve_condition(&family, s, target, SolveOptions::default()))?;
        into_handle(FloquetSolution(sol), out);
        Ok(())
    })
}

/// Number of roots found, or 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn floquet_solution_len(solution: *const FloquetSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.solutions.len())
}

/// Root `index` in ascending order.
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_solution_root(
    solution: *const FloquetSolution,
    index: usize,
    out: *mut f64,
) -> FloquetStatus {
    guard(|| {
        let sol = solution.as_ref().ok_or_else(|| null("solution"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = *sol.0.solutions.get(index).ok_or_else(|| {
            (
                FloquetStatus::OutOfRange,
                format!("root index {index} outside 0..{}", sol.0.solutions.len()),
            )
        })?;
        Ok(())
    })
}

/// Root of smallest magnitude; [`FloquetStatus::NoSolution`] when there is none.
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_solution_preferred(
    solution: *const FloquetSolution,
    out: *mut f64,
) -> FloquetStatus {
    guard(|| {
        let sol = solution.as_ref().ok_or_else(|| null("solution"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        match sol.0.preferred {
            Some(v) => {
                *out = v;
                Ok(())
            }
            None => Err((
                FloquetStatus::NoSolution,
                sol.0
                    .diagnostic
                    .clone()
                    .unwrap_or_else(|| "no solution".into()),
            )),
        }
    })
}

/// # Safety
/// `solution` must be NULL or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn floquet_solution_free(solution: *mut FloquetSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Coefficients `(A, B)` of the effective `A H_XY + B H_ZZ` for a dipolar XXZ chain
/// of `n_sites` driven by `profile`.
///
/// # Safety
/// `profile` must be a live profile handle; `out_a` and `out_b` writable.
#[no_mangle]
pub unsafe extern "C" fn floquet_effective_xxz(
    n_sites: usize,
    j_perp: f64,
    j_z: f64,
    profile: *const FloquetProfile,
    conv: FloquetConvention,
    out_a: *mut f64,
    out_b: *mut f64,
) -> FloquetStatus {
    guard(|| {
        let profile = profile.as_ref().ok_or_else(|| null("profile"))?;
        let out_a = out_a.as_mut().ok_or_else(|| null("out_a"))?;
        let out_b = out_b.as_mut().ok_or_else(|| null("out_b"))?;
        let model = SpinModel::xxz(core(dipolar_couplings(n_sites))?, j_perp, j_z);
        let opts = EffectiveOptions {
            convention: convention(conv),
            ..EffectiveOptions::default()
        };
        let eff = core(effective_hamiltonian(&model, &profile.0, opts))?;
        *out_a = eff.a_coeff.unwrap_or(f64::NAN);
        *out_b = eff.b_coeff.unwrap_or(f64::NAN);
        Ok(())
    })
}
