//! Survival probabilities of Brownian motion below a one-sided moving
//! boundary.
//!
//! The crate computes, bounds, and empirically verifies
//! `P(B_t <= f(t) for all t <= T)` for boundaries `f` built from a small
//! analytic term family:
//!
//! - [`boundary`] — expression parsing, exact derivatives, and the
//!   `int_1^inf |f(t)| t^{-3/2} dt` convergence test that separates
//!   boundaries preserving the `T^{-1/2}` survival rate from those that
//!   do not.
//! - [`exact`] — closed-form and quadrature-exact quantities for constant
//!   boundaries: the reflection-principle survival probability, the mean of
//!   Brownian motion conditioned to stay below a level, and the empirical
//!   repulsion constant behind the `sqrt(u)` pushdown.
//! - [`simulate`] — a reproducible parallel Monte Carlo engine: Euler paths
//!   with Brownian-bridge crossing correction, a Girsanov-weighted
//!   change-of-measure estimator, first-passage sampling, and Bessel(3)
//!   means.
//! - [`bounds`] — the explicit survival lower bound, weighted log-log rate
//!   fitting, and the Slepian product inequality check.
//!
//! All Monte Carlo estimates are deterministic given a seed: per-path
//! substreams are keyed by `(seed, path index)` so results are bit-identical
//! regardless of thread count.

// validation deliberately uses `!(x > 0.0)` so NaN inputs fail closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod math;
pub mod quad;
pub mod rng;
pub mod simulate;

pub use boundary::{
    exponent_integrals, integral_test, parse_boundary, BoundaryFunction, BoundaryTerm,
    IntegralReport, TermKind, Verdict,
};
pub use bounds::{
    fit_rate_exponent, lower_bound, slepian_check, verify_lower_bound, BoundCheck,
    BoundEvaluation, RateFit, RatePoint, SlepianCheck,
};
pub use error::{Error, Result};
pub use exact::{conditioned_mean, minimal_c_scan, p_const_exact, ConditionedMeanReport};
pub use simulate::{
    bessel_mean, estimate_exit_direct, estimate_exit_girsanov, estimate_novikov_limit,
    sample_tau, BesselEstimate, Estimator, ExitEstimate, NovikovReport, SimConfig, TauSample,
};
