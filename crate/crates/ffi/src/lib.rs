//! C ABI over the `escrate` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns an
//! [`EscrateStatus`]; the message of the last failure on the calling thread
//! is available from [`escrate_last_error`]. Panics are caught and reported
//! as [`EscrateStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use escrate::cli::parse_drift;
use escrate::profiles::{profile_from_radial, EnergyMode, RadialCoefficient};
use escrate::rate_solver::{conservativeness, rate_table, RateFunction, Subject, Verdict};
use escrate::sde::{ensemble, EnsembleSpec, PathEnsemble, Sde1D};
use escrate::Error;

/// Result of a call. Values other than `Ok` leave outputs untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscrateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NonPositiveCoefficient = 3,
    QuadratureFailure = 4,
    OutOfRange = 5,
    SingularOrigin = 6,
    DomainError = 7,
    NonMonotoneTransform = 8,
    NonPositiveDenominator = 9,
    FiniteTotalIntegral = 10,
    ExtrapolationError = 11,
    NonFiniteState = 12,
    DriftOrderViolated = 13,
    Panic = 14,
}

impl From<&Error> for EscrateStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonPositiveCoefficient { .. } => Self::NonPositiveCoefficient,
            Error::QuadratureFailure { .. } => Self::QuadratureFailure,
            Error::OutOfRange { .. } => Self::OutOfRange,
            Error::SingularOrigin { .. } => Self::SingularOrigin,
            Error::DomainError { .. } => Self::DomainError,
            Error::NonMonotoneTransform { .. } => Self::NonMonotoneTransform,
            Error::NonPositiveDenominator { .. } => Self::NonPositiveDenominator,
            Error::FiniteTotalIntegral { .. } => Self::FiniteTotalIntegral,
            Error::ExtrapolationError { .. } => Self::ExtrapolationError,
            Error::NonFiniteState { .. } => Self::NonFiniteState,
            Error::DriftOrderViolated { .. } => Self::DriftOrderViolated,
            Error::InvalidParameter(_) => Self::InvalidParameter,
        }
    }
}

/// Radial coefficient family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscrateFamily {
    /// `ã ≡ 1`; the parameter is ignored.
    Constant = 0,
    /// `(1+r)^α`.
    Power = 1,
    /// `(1+r)² log(1+r)^β`.
    SquaredLog = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscrateVerdict {
    Conservative = 0,
    NonConservative = 1,
    Inconclusive = 2,
}

/// Rate function `t ↦ ψ(t)` sampled on a time grid.
pub struct EscrateRateTable(RateFunction);

/// Simulated paths on a shared time grid.
pub struct EscrateEnsemble(PathEnsemble);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EscrateStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EscrateStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            EscrateStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(format!("{}: {e}", e.name()));
            EscrateStatus::from(&e)
        }
        Err(_) => {
            set_error("panic inside escrate".to_string());
            EscrateStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> Result<*const T, Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(p)
    }
}

fn coefficient(family: EscrateFamily, param: f64) -> Result<RadialCoefficient, Error> {
    match family {
        EscrateFamily::Constant => Ok(RadialCoefficient::Constant),
        EscrateFamily::Power => RadialCoefficient::power(param),
        EscrateFamily::SquaredLog => RadialCoefficient::squared_log(param),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn escrate_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn escrate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Solves `ψ` for the radial profile of `family` in dimension `n` (unit
/// energy) at `times[0..len]`, scaled by `scale`.
///
/// # Safety
/// `times` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn escrate_rate_table_new(
    family: EscrateFamily,
    param: f64,
    n: u32,
    times: *const f64,
    len: usize,
    scale: f64,
    out: *mut *mut EscrateRateTable,
) -> EscrateStatus {
    guard(|| {
        non_null(out, "out")?;
        let times = if len == 0 { &[][..] } else { std::slice::from_raw_parts(non_null(times, "times")?, len) };
        let profile = profile_from_radial(&coefficient(family, param)?, n, EnergyMode::UnitEnergy)?;
        let table = rate_table(&profile, times, scale)?;
        *out = Box::into_raw(Box::new(EscrateRateTable(table)));
        Ok(())
    })
}

/// Interpolated `ψ(t)`.
///
/// # Safety
/// `table` must come from [`escrate_rate_table_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn escrate_rate_table_eval(table: *const EscrateRateTable, t: f64, out: *mut f64) -> EscrateStatus {
    guard(|| {
        let table = &*non_null(table, "table")?;
        non_null(out, "out")?;
        *out = table.0.eval(t)?;
        Ok(())
    })
}

/// Number of samples in the table, 0 for NULL.
///
/// # Safety
/// `table` must be NULL or come from [`escrate_rate_table_new`].
#[no_mangle]
pub unsafe extern "C" fn escrate_rate_table_len(table: *const EscrateRateTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.samples().len())
}

/// # Safety
/// `table` must be NULL or come from [`escrate_rate_table_new`], and is not
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn escrate_rate_table_free(table: *mut EscrateRateTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Conservativeness verdict for `family` in dimension `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn escrate_conservativeness(
    family: EscrateFamily,
    param: f64,
    n: u32,
    out: *mut EscrateVerdict,
) -> EscrateStatus {
    guard(|| {
        non_null(out, "out")?;
        let coeff = coefficient(family, param)?;
        *out = match conservativeness(&Subject::Coefficient { coeff: &coeff, n })? {
            Verdict::Conservative => EscrateVerdict::Conservative,
            Verdict::NonConservative => EscrateVerdict::NonConservative,
            Verdict::Inconclusive(_) => EscrateVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Simulates `n_paths` Euler paths of `dx = θ(x)dt + σ dw` reflected at
/// `floor`. `drift` is a spec such as `"bessel:1"`, `"constant:0.5"`,
/// `"power:1:0.5"` or `"hyperbolic:2:1"`. Results depend only on the
/// arguments.
///
/// # Safety
/// `drift` must be a NUL-terminated string and `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn escrate_ensemble_new(
    drift: *const c_char,
    sigma: f64,
    floor: f64,
    x0: f64,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    out: *mut *mut EscrateEnsemble,
) -> EscrateStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = CStr::from_ptr(non_null(drift, "drift")?).to_string_lossy();
        let drift = parse_drift(&spec, None).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let sde = Sde1D::new(drift).with_sigma(sigma)?.with_floor(floor)?;
        let e = ensemble(&EnsembleSpec { sde, x0, horizon, dt, n_paths, master_seed, barrier: None })?;
        *out = Box::into_raw(Box::new(EscrateEnsemble(e)));
        Ok(())
    })
}

/// Number of paths, 0 for NULL.
///
/// # Safety
/// `e` must be NULL or come from [`escrate_ensemble_new`].
#[no_mangle]
pub unsafe extern "C" fn escrate_ensemble_n_paths(e: *const EscrateEnsemble) -> usize {
    e.as_ref().map_or(0, |e| e.0.n_paths)
}

/// Grid points per path, 0 for NULL.
///
/// # Safety
/// `e` must be NULL or come from [`escrate_ensemble_new`].
#[no_mangle]
pub unsafe extern "C" fn escrate_ensemble_grid_len(e: *const EscrateEnsemble) -> usize {
    e.as_ref().map_or(0, |e| e.0.grid_len())
}

/// Copies path `index` into `buf`, which must hold `grid_len` doubles.
///
/// # Safety
/// `e` must come from [`escrate_ensemble_new`]; `buf` must have room for
/// `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn escrate_ensemble_path(
    e: *const EscrateEnsemble,
    index: usize,
    buf: *mut f64,
    buf_len: usize,
) -> EscrateStatus {
    guard(|| {
        let e = &(*non_null(e, "ensemble")?).0;
        non_null(buf, "buf")?;
        if index >= e.n_paths {
            return Err(Error::InvalidParameter(format!("path {index} of {}", e.n_paths)).into());
        }
        let path = e.path(index);
        if buf_len < path.len() {
            return Err(Error::InvalidParameter(format!("buffer holds {buf_len}, path has {}", path.len())).into());
        }
        ptr::copy_nonoverlapping(path.as_ptr(), buf, path.len());
        Ok(())
    })
}

/// # Safety
/// `e` must be NULL or come from [`escrate_ensemble_new`], and is not used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn escrate_ensemble_free(e: *mut EscrateEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
