//! C ABI for the exit-probability library.
//!
//! Boundaries are opaque handles created by [`exitprob_boundary_parse`] and
//! released with [`exitprob_boundary_free`]. Every fallible call returns an
//! [`ExitprobStatus`]; on failure a thread-local message is readable through
//! [`exitprob_last_error_message`] until the next call on the same thread.
//!
//! The generated header lives at `include/exitprob.h` (written by the build
//! script via cbindgen).

// validation deliberately uses `!(x > 0.0)` so NaN inputs fail closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use exitprob::{BoundaryFunction, Error, RatePoint, SimConfig};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitprobStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    SyntaxError = 3,
    DomainError = 4,
    RateError = 5,
    ConfigError = 6,
    HypothesisError = 7,
    DegenerateError = 8,
    InternalError = 9,
}

/// Integral-test verdicts as stable integers.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitprobVerdict {
    Convergent = 0,
    Divergent = 1,
    Inconclusive = 2,
}

/// Opaque boundary handle.
pub struct ExitprobBoundary {
    inner: BoundaryFunction,
}

/// Simulation parameters (mirrors the library configuration).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ExitprobSimConfig {
    pub n_paths: u64,
    pub n_steps: u64,
    pub t_horizon: f64,
    pub seed: u64,
    /// Nonzero enables the within-step bridge crossing correction.
    pub bridge_correction: u8,
    pub chunk_size: u64,
}

impl ExitprobSimConfig {
    fn to_config(self) -> SimConfig {
        SimConfig {
            n_paths: self.n_paths,
            n_steps: self.n_steps,
            t_horizon: self.t_horizon,
            seed: self.seed,
            bridge_correction: self.bridge_correction != 0,
            chunk_size: self.chunk_size,
        }
    }
}

/// Monte Carlo exit estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ExitprobEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_paths: u64,
    /// NaN for the direct estimator.
    pub effective_sample_size: f64,
    /// Nonzero when produced by the Girsanov-weighted estimator.
    pub is_girsanov: u8,
}

/// Survival lower-bound evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ExitprobBound {
    pub base_probability: f64,
    pub half_int_fprime_sq: f64,
    pub int_fpp_sqrt: f64,
    pub sqrt_t_fprime_t: f64,
    pub lower_bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> ExitprobStatus {
    match err {
        Error::Syntax { .. } => ExitprobStatus::SyntaxError,
        Error::Domain(_) => ExitprobStatus::DomainError,
        Error::Rate(_) => ExitprobStatus::RateError,
        Error::Config(_) => ExitprobStatus::ConfigError,
        Error::Hypothesis(_) => ExitprobStatus::HypothesisError,
        Error::Degenerate(_) => ExitprobStatus::DegenerateError,
    }
}

fn fail(err: Error) -> ExitprobStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Run `f`, converting panics into `InternalError` instead of unwinding
/// across the ABI.
fn guarded<F: FnOnce() -> ExitprobStatus>(f: F) -> ExitprobStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".to_string());
            set_error(&msg);
            ExitprobStatus::InternalError
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn exitprob_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. Valid until the next
/// library call on the same thread; never NULL.
#[no_mangle]
pub extern "C" fn exitprob_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a boundary expression into a new handle.
///
/// # Safety
/// `expr` must be a valid NUL-terminated string and `out` a valid pointer.
/// The returned handle must be released with [`exitprob_boundary_free`].
#[no_mangle]
pub unsafe extern "C" fn exitprob_boundary_parse(
    expr: *const c_char,
    out: *mut *mut ExitprobBoundary,
) -> ExitprobStatus {
    if expr.is_null() || out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    let text = match CStr::from_ptr(expr).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("expression is not valid UTF-8");
            return ExitprobStatus::InvalidUtf8;
        }
    };
    guarded(|| match exitprob::parse_boundary(text) {
        Ok(b) => {
            *out = Box::into_raw(Box::new(ExitprobBoundary { inner: b }));
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Release a boundary handle. NULL is ignored.
///
/// # Safety
/// `b` must be a handle from [`exitprob_boundary_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn exitprob_boundary_free(b: *mut ExitprobBoundary) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Evaluate `f`, `f'`, or `f''` (order 0, 1, 2) at `t >= 0`.
///
/// # Safety
/// `b` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exitprob_boundary_eval(
    b: *const ExitprobBoundary,
    t: f64,
    order: u32,
    out: *mut f64,
) -> ExitprobStatus {
    if b.is_null() || out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    if order > 2 {
        set_error("derivative order must be 0, 1, or 2");
        return ExitprobStatus::DomainError;
    }
    if !(t >= 0.0) {
        set_error("evaluation time must be nonnegative");
        return ExitprobStatus::DomainError;
    }
    let boundary = &(*b).inner;
    guarded(|| {
        *out = boundary.eval(t, order as u8);
        ExitprobStatus::Ok
    })
}

/// Integral test: verdict plus the tail-extrapolated value.
///
/// # Safety
/// `b` must be a live handle; `out_verdict` and `out_value` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn exitprob_integral_test(
    b: *const ExitprobBoundary,
    tolerance: f64,
    out_verdict: *mut ExitprobVerdict,
    out_value: *mut f64,
) -> ExitprobStatus {
    if b.is_null() || out_verdict.is_null() || out_value.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    if !(tolerance > 0.0) {
        set_error("tolerance must be positive");
        return ExitprobStatus::DomainError;
    }
    let boundary = &(*b).inner;
    guarded(|| {
        let r = exitprob::integral_test(boundary, tolerance);
        *out_verdict = match r.verdict {
            exitprob::Verdict::Convergent => ExitprobVerdict::Convergent,
            exitprob::Verdict::Divergent => ExitprobVerdict::Divergent,
            exitprob::Verdict::Inconclusive => ExitprobVerdict::Inconclusive,
        };
        *out_value = r.value;
        ExitprobStatus::Ok
    })
}

/// The three lower-bound exponent integrals, written to `out[0..3]`:
/// `int f'^2`, `int |f''| sqrt(s)`, `sqrt(T) |f'(T)|`.
///
/// # Safety
/// `b` must be a live handle; `out` must point to at least 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn exitprob_exponent_integrals(
    b: *const ExitprobBoundary,
    t_horizon: f64,
    out: *mut f64,
) -> ExitprobStatus {
    if b.is_null() || out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    if !(t_horizon > 0.0) {
        set_error("horizon must be positive");
        return ExitprobStatus::DomainError;
    }
    let boundary = &(*b).inner;
    guarded(|| {
        let (i1, i2, i3) = exitprob::exponent_integrals(boundary, t_horizon);
        *out.add(0) = i1;
        *out.add(1) = i2;
        *out.add(2) = i3;
        ExitprobStatus::Ok
    })
}

/// `P(sup_{t <= T} B_t <= a)` in closed form.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exitprob_p_const_exact(
    a: f64,
    t_horizon: f64,
    out: *mut f64,
) -> ExitprobStatus {
    if out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    guarded(|| match exitprob::p_const_exact(a, t_horizon) {
        Ok(p) => {
            *out = p;
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// `E[B_u | sup_{t <= T} B_t <= a]` by quadrature.
///
/// # Safety
/// `out_mean` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exitprob_conditioned_mean(
    u: f64,
    t_horizon: f64,
    a: f64,
    out_mean: *mut f64,
) -> ExitprobStatus {
    if out_mean.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    guarded(|| match exitprob::conditioned_mean(u, t_horizon, a) {
        Ok(r) => {
            *out_mean = r.mean;
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Supremum of `-E[B_u | sup <= a] / sqrt(u)` over the horizon grid.
///
/// # Safety
/// `t_grid` must point to `n_horizons` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn exitprob_minimal_c_scan(
    a: f64,
    t_grid: *const f64,
    n_horizons: usize,
    u_per_t: usize,
    out: *mut f64,
) -> ExitprobStatus {
    if t_grid.is_null() || out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    let grid = std::slice::from_raw_parts(t_grid, n_horizons);
    guarded(|| match exitprob::minimal_c_scan(a, grid, u_per_t) {
        Ok(c) => {
            *out = c;
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Monte Carlo exit estimate; `use_girsanov` selects the weighted estimator.
///
/// # Safety
/// `b` must be a live handle; `cfg` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn exitprob_estimate_exit(
    b: *const ExitprobBoundary,
    cfg: *const ExitprobSimConfig,
    use_girsanov: u8,
    out: *mut ExitprobEstimate,
) -> ExitprobStatus {
    if b.is_null() || cfg.is_null() || out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    let boundary = &(*b).inner;
    let config = (*cfg).to_config();
    guarded(|| {
        let run = if use_girsanov != 0 {
            exitprob::estimate_exit_girsanov(boundary, &config)
        } else {
            exitprob::estimate_exit_direct(boundary, &config)
        };
        match run {
            Ok(est) => {
                *out = ExitprobEstimate {
                    p_hat: est.p_hat,
                    std_err: est.std_err,
                    n_paths: est.n_paths,
                    effective_sample_size: est.effective_sample_size.unwrap_or(f64::NAN),
                    is_girsanov: (est.estimator == exitprob::Estimator::Girsanov) as u8,
                };
                ExitprobStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluate the explicit survival lower bound.
///
/// # Safety
/// `b` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exitprob_lower_bound(
    b: *const ExitprobBoundary,
    t_horizon: f64,
    c1: f64,
    c2: f64,
    out: *mut ExitprobBound,
) -> ExitprobStatus {
    if b.is_null() || out.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    let boundary = &(*b).inner;
    guarded(|| match exitprob::lower_bound(boundary, t_horizon, c1, c2) {
        Ok(ev) => {
            *out = ExitprobBound {
                base_probability: ev.base_probability,
                half_int_fprime_sq: ev.half_int_fprime_sq,
                int_fpp_sqrt: ev.int_fpp_sqrt,
                sqrt_t_fprime_t: ev.sqrt_t_fprime_t,
                lower_bound: ev.lower_bound,
            };
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Weighted log-log fit of survival probabilities against horizons.
///
/// # Safety
/// `ts`, `p_hats`, `std_errs` must each point to `n_points` doubles; the
/// three `out_*` pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn exitprob_fit_rate_exponent(
    ts: *const f64,
    p_hats: *const f64,
    std_errs: *const f64,
    n_points: usize,
    out_slope: *mut f64,
    out_intercept: *mut f64,
    out_halfwidth: *mut f64,
) -> ExitprobStatus {
    if ts.is_null()
        || p_hats.is_null()
        || std_errs.is_null()
        || out_slope.is_null()
        || out_intercept.is_null()
        || out_halfwidth.is_null()
    {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    let t = std::slice::from_raw_parts(ts, n_points);
    let p = std::slice::from_raw_parts(p_hats, n_points);
    let se = std::slice::from_raw_parts(std_errs, n_points);
    let points: Vec<RatePoint> = (0..n_points)
        .map(|i| RatePoint { t: t[i], p_hat: p[i], std_err: se[i] })
        .collect();
    guarded(|| match exitprob::fit_rate_exponent(&points) {
        Ok(fit) => {
            *out_slope = fit.slope;
            *out_intercept = fit.intercept;
            *out_halfwidth = fit.slope_halfwidth;
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Monte Carlo mean modulus of three-dimensional Brownian motion at time `s`.
///
/// # Safety
/// `out_mean` and `out_std_err` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn exitprob_bessel_mean(
    s: f64,
    n_paths: u64,
    seed: u64,
    out_mean: *mut f64,
    out_std_err: *mut f64,
) -> ExitprobStatus {
    if out_mean.is_null() || out_std_err.is_null() {
        set_error("null argument");
        return ExitprobStatus::NullArgument;
    }
    let cfg = SimConfig::new(n_paths, 1, s.max(f64::MIN_POSITIVE), seed);
    guarded(|| match exitprob::bessel_mean(s, &cfg) {
        Ok(est) => {
            *out_mean = est.mean;
            *out_std_err = est.std_err;
            ExitprobStatus::Ok
        }
        Err(e) => fail(e),
    })
}
