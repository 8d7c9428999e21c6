//! Explicit survival lower bound, rate-exponent fitting, and the Slepian
//! product inequality check.

use rand::RngExt;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{exponent_integrals, BoundaryFunction};
use crate::error::{Error, Result};
use crate::exact::p_const_exact;
use crate::rng::path_rng;
use crate::simulate::{estimate_exit_direct, ExitEstimate, SimConfig};

/// The assembled lower bound
/// `P(B <= f(0) on [0,T]) * exp(-1/2 int f'^2 - c1 int |f''| sqrt(s) - c2 sqrt(T) |f'(T)|)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundEvaluation {
    pub t_horizon: f64,
    /// `p_const_exact(f(0), T)`.
    pub base_probability: f64,
    /// `1/2 int_0^T f'(s)^2 ds`.
    pub half_int_fprime_sq: f64,
    /// `int_0^T |f''(s)| sqrt(s) ds`.
    pub int_fpp_sqrt: f64,
    /// `sqrt(T) |f'(T)|`.
    pub sqrt_t_fprime_t: f64,
    pub c1: f64,
    pub c2: f64,
    pub lower_bound: f64,
}

/// Evaluate the explicit survival lower bound at horizon `T` with repulsion
/// constants `c1`, `c2` (both default to `2 sqrt(2/pi)` at call sites).
pub fn lower_bound(b: &BoundaryFunction, t_horizon: f64, c1: f64, c2: f64) -> Result<BoundEvaluation> {
    if !(t_horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {}", t_horizon)));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Domain(format!("constants must be positive, got c1={} c2={}", c1, c2)));
    }
    let base_probability = p_const_exact(b.value(0.0), t_horizon)?;
    let (int_fprime_sq, int_fpp_sqrt, sqrt_t_fprime_t) = exponent_integrals(b, t_horizon);
    let half_int_fprime_sq = 0.5 * int_fprime_sq;
    let exponent = -half_int_fprime_sq - c1 * int_fpp_sqrt - c2 * sqrt_t_fprime_t;
    Ok(BoundEvaluation {
        t_horizon,
        base_probability,
        half_int_fprime_sq,
        int_fpp_sqrt,
        sqrt_t_fprime_t,
        c1,
        c2,
        lower_bound: base_probability * exponent.exp(),
    })
}

/// Monte Carlo check of the lower bound on a decreasing convex boundary.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub estimate: ExitEstimate,
    pub bound: BoundEvaluation,
    /// `p_hat + 3 std_err - lower_bound`; nonnegative when the check holds.
    pub margin: f64,
    pub holds: bool,
}

/// Number of grid points sampled when checking `f' <= 0`, `f'' >= 0`.
const HYPOTHESIS_SAMPLES: usize = 1000;

fn check_decreasing_convex(b: &BoundaryFunction, t_horizon: f64) -> Result<()> {
    for i in 0..=HYPOTHESIS_SAMPLES {
        let t = t_horizon * i as f64 / HYPOTHESIS_SAMPLES as f64;
        let d1 = b.deriv1(t);
        let d2 = b.deriv2(t);
        if d1 > 1e-12 {
            return Err(Error::Hypothesis(format!(
                "boundary is increasing at t = {} (f' = {})",
                t, d1
            )));
        }
        if d2 < -1e-12 {
            return Err(Error::Hypothesis(format!(
                "boundary is concave at t = {} (f'' = {})",
                t, d2
            )));
        }
    }
    Ok(())
}

/// Verify `p_hat + 3 std_err >= lower_bound` for a boundary with
/// `f' <= 0`, `f'' >= 0` on `[0, T]` (checked by dense sampling).
pub fn verify_lower_bound(
    b: &BoundaryFunction,
    t_horizon: f64,
    c1: f64,
    c2: f64,
    cfg: &SimConfig,
) -> Result<BoundCheck> {
    check_decreasing_convex(b, t_horizon)?;
    let bound = lower_bound(b, t_horizon, c1, c2)?;
    let mut run_cfg = *cfg;
    run_cfg.t_horizon = t_horizon;
    let estimate = estimate_exit_direct(b, &run_cfg)?;
    let margin = estimate.p_hat + 3.0 * estimate.std_err - bound.lower_bound;
    Ok(BoundCheck { estimate, bound, margin, holds: margin >= 0.0 })
}

/// One `(T, p_hat, std_err)` observation for rate fitting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub t: f64,
    pub p_hat: f64,
    pub std_err: f64,
}

/// Weighted least-squares fit of `ln p` on `ln T`.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% normal-approximation half-width on the slope.
    pub slope_halfwidth: f64,
    pub points: Vec<RatePoint>,
}

/// Fit `ln p_hat = intercept + slope * ln T` with weights
/// `1 / (std_err / p_hat)^2` (the delta-method variance of `ln p_hat`).
/// Points with zero reported error get unit weight, so noiseless synthetic
/// inputs are fit unweighted.
pub fn fit_rate_exponent(points: &[RatePoint]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for w in points.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::Domain("horizons must be strictly increasing".into()));
        }
    }
    for p in points {
        if !(p.p_hat > 0.0) {
            return Err(Error::Domain(format!("p_hat must be positive, got {}", p.p_hat)));
        }
    }

    let xs: Vec<f64> = points.iter().map(|p| p.t.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.p_hat.ln()).collect();
    let ws: Vec<f64> = points
        .iter()
        .map(|p| {
            if p.std_err > 0.0 {
                (p.p_hat / p.std_err).powi(2)
            } else {
                1.0
            }
        })
        .collect();

    let w_sum: f64 = ws.iter().sum();
    let x_bar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / w_sum;
    let y_bar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / w_sum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        let dx = xs[i] - x_bar;
        sxx += ws[i] * dx * dx;
        sxy += ws[i] * dx * (ys[i] - y_bar);
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let slope_halfwidth = 1.96 / sxx.sqrt();
    Ok(RateFit { slope, intercept, slope_halfwidth, points: points.to_vec() })
}

/// Monte Carlo check of the product inequality
/// `P(below on [0,T]) >= P(below on [0,t0]) * P(below on [t0,T])`.
#[derive(Debug, Clone, Serialize)]
pub struct SlepianCheck {
    pub t0: f64,
    pub t_horizon: f64,
    pub p_full: f64,
    pub p_full_std_err: f64,
    pub p_head: f64,
    pub p_head_std_err: f64,
    pub p_tail: f64,
    pub p_tail_std_err: f64,
    pub product: f64,
    pub product_std_err: f64,
    /// `p_full + 3 * combined_err - product`; nonnegative when the check holds.
    pub margin: f64,
    pub holds: bool,
}

/// Estimate the three window-survival probabilities from one set of paths.
/// The `[t0, T]` factor marginalizes the state at `t0`: full paths are
/// simulated and the survival indicator is evaluated on that window only.
pub fn slepian_check(
    b: &BoundaryFunction,
    t0: f64,
    t_horizon: f64,
    cfg: &SimConfig,
) -> Result<SlepianCheck> {
    if !(t0 > 0.0 && t0 < t_horizon) {
        return Err(Error::Config(format!(
            "split point must satisfy 0 < t0 < T, got t0 = {}, T = {}",
            t0, t_horizon
        )));
    }
    let mut run_cfg = *cfg;
    run_cfg.t_horizon = t_horizon;
    run_cfg.validate()?;

    let n_steps = run_cfg.n_steps as usize;
    let times: Vec<f64> = (0..=n_steps)
        .map(|i| t_horizon * i as f64 / n_steps as f64)
        .collect();
    let fvals: Vec<f64> = times.iter().map(|&t| b.value(t)).collect();
    let dt = t_horizon / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let bridge = run_cfg.bridge_correction;
    let seed = run_cfg.seed;

    let n = run_cfg.n_paths;
    let size = run_cfg.chunk_size;
    let n_chunks = n.div_ceil(size);
    let counts: Vec<(u64, u64, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * size;
            let hi = (lo + size).min(n);
            let mut full = 0u64;
            let mut head = 0u64;
            let mut tail = 0u64;
            for p in lo..hi {
                let mut rng = path_rng(seed, p);
                let mut x = 0.0f64;
                let mut gap_prev = fvals[0];
                let mut head_ok = true;
                let mut tail_ok = true;
                for i in 1..=n_steps {
                    if !head_ok && !tail_ok {
                        break;
                    }
                    let z: f64 = rng.sample(StandardNormal);
                    x += sqrt_dt * z;
                    let gap = fvals[i] - x;
                    // a grid crossing at t_i counts against every window
                    // containing t_i; a bridge crossing inside (t_{i-1}, t_i)
                    // counts against windows meeting the open interior
                    if gap < 0.0 {
                        if times[i] <= t0 {
                            head_ok = false;
                        }
                        if times[i] >= t0 {
                            tail_ok = false;
                        }
                    } else if bridge {
                        let e: f64 = rng.sample(Exp1);
                        if e > 2.0 * gap_prev * gap / dt {
                            if times[i - 1] < t0 {
                                head_ok = false;
                            }
                            if times[i] > t0 {
                                tail_ok = false;
                            }
                        }
                    }
                    gap_prev = gap;
                }
                if head_ok && tail_ok {
                    full += 1;
                }
                if head_ok {
                    head += 1;
                }
                if tail_ok {
                    tail += 1;
                }
            }
            (full, head, tail)
        })
        .collect();

    let mut full = 0u64;
    let mut head = 0u64;
    let mut tail = 0u64;
    for (a, b2, c) in counts {
        full += a;
        head += b2;
        tail += c;
    }
    let nf = n as f64;
    let binom = |k: u64| {
        let p = k as f64 / nf;
        (p, (p * (1.0 - p) / nf).sqrt())
    };
    let (p_full, p_full_std_err) = binom(full);
    let (p_head, p_head_std_err) = binom(head);
    let (p_tail, p_tail_std_err) = binom(tail);
    let product = p_head * p_tail;
    let product_std_err =
        (p_tail * p_tail * p_head_std_err * p_head_std_err
            + p_head * p_head * p_tail_std_err * p_tail_std_err)
            .sqrt();
    let combined = (p_full_std_err * p_full_std_err + product_std_err * product_std_err).sqrt();
    let margin = p_full + 3.0 * combined - product;
    Ok(SlepianCheck {
        t0,
        t_horizon,
        p_full,
        p_full_std_err,
        p_head,
        p_head_std_err,
        p_tail,
        p_tail_std_err,
        product,
        product_std_err,
        margin,
        holds: margin >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::parse_boundary;
    use crate::math::BESSEL3_MEAN;

    #[test]
    fn constant_boundary_bound_is_exact_base() {
        let b = parse_boundary("1").unwrap();
        for t in [0.5, 1.0, 10.0, 1e4] {
            let ev = lower_bound(&b, t, BESSEL3_MEAN, BESSEL3_MEAN).unwrap();
            assert_eq!(ev.lower_bound, ev.base_probability);
            assert_eq!(ev.half_int_fprime_sq, 0.0);
        }
    }

    #[test]
    fn exp_boundary_bound_frozen() {
        // frozen by closed-form antiderivatives:
        // p_const(2,10) * exp(-(1-e^{-20})/4 - c*I2 - c*sqrt(10)e^{-10})
        let b = parse_boundary("1 + exp(-1*t)").unwrap();
        let ev = lower_bound(&b, 10.0, BESSEL3_MEAN, BESSEL3_MEAN).unwrap();
        assert!(
            (ev.lower_bound - 0.08954166584073792).abs() < 1e-9,
            "lower = {}",
            ev.lower_bound
        );
        assert!((ev.base_probability - 0.4729107431344619).abs() < 1e-12);
    }

    #[test]
    fn log_boundary_bound_frozen() {
        let b = parse_boundary("1 - ln(1+t)").unwrap();
        let ev = lower_bound(&b, 100.0, BESSEL3_MEAN, BESSEL3_MEAN).unwrap();
        assert!(ev.lower_bound > 0.0);
        assert!(ev.lower_bound <= ev.base_probability);
        assert!(
            (ev.lower_bound - 0.004641713820417067).abs() < 1e-10,
            "lower = {}",
            ev.lower_bound
        );
    }

    #[test]
    fn bound_monotone_in_constants() {
        let b = parse_boundary("1 + exp(-1*t)").unwrap();
        let base = lower_bound(&b, 10.0, 1.0, 1.0).unwrap();
        let c1_up = lower_bound(&b, 10.0, 1.5, 1.0).unwrap();
        let c2_up = lower_bound(&b, 10.0, 1.0, 1.5).unwrap();
        assert!(c1_up.lower_bound < base.lower_bound);
        assert!(c2_up.lower_bound < base.lower_bound);
    }

    #[test]
    fn verify_rejects_increasing_boundary() {
        let b = parse_boundary("1 + (1+t)^0.25").unwrap();
        let cfg = SimConfig::new(1_000, 100, 1.0, 1);
        match verify_lower_bound(&b, 1.0, BESSEL3_MEAN, BESSEL3_MEAN, &cfg) {
            Err(Error::Hypothesis(_)) => {}
            other => panic!("expected hypothesis error, got {:?}", other),
        }
    }

    #[test]
    fn verify_holds_on_exp_boundary_small_run() {
        let b = parse_boundary("1 + exp(-1*t)").unwrap();
        let cfg = SimConfig::new(50_000, 500, 10.0, 2);
        let check = verify_lower_bound(&b, 10.0, BESSEL3_MEAN, BESSEL3_MEAN, &cfg).unwrap();
        assert!(check.holds, "margin = {}", check.margin);
    }

    #[test]
    fn fit_recovers_exact_power_laws() {
        for slope in [-2.0, -1.0, -0.5, -0.25] {
            let points: Vec<RatePoint> = [10.0, 100.0, 1000.0, 10_000.0, 100_000.0]
                .iter()
                .map(|&t: &f64| RatePoint { t, p_hat: 3.0 * t.powf(slope), std_err: 0.0 })
                .collect();
            let fit = fit_rate_exponent(&points).unwrap();
            assert!(
                (fit.slope - slope).abs() < 1e-12,
                "slope {} recovered as {}",
                slope,
                fit.slope
            );
            assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
            assert!(fit.slope_halfwidth > 0.0);
        }
    }

    #[test]
    fn fit_on_exact_constant_boundary_values() {
        // p_const(1, T) over two decades: slope within [-0.51, -0.49]
        let points: Vec<RatePoint> = [1e2, 10f64.powf(2.5), 1e3, 10f64.powf(3.5), 1e4]
            .iter()
            .map(|&t| {
                let p = crate::exact::p_const_exact(1.0, t).unwrap();
                RatePoint { t, p_hat: p, std_err: 1e-3 * p }
            })
            .collect();
        let fit = fit_rate_exponent(&points).unwrap();
        assert!(
            fit.slope > -0.51 && fit.slope < -0.49,
            "slope = {}",
            fit.slope
        );
    }

    #[test]
    fn fit_degenerate_cases() {
        let p = |t: f64| RatePoint { t, p_hat: 0.1, std_err: 0.0 };
        assert!(matches!(fit_rate_exponent(&[p(1.0), p(2.0)]), Err(Error::Degenerate(_))));
        assert!(fit_rate_exponent(&[p(1.0), p(2.0), p(1.5)]).is_err());
        let bad = RatePoint { t: 3.0, p_hat: 0.0, std_err: 0.0 };
        assert!(fit_rate_exponent(&[p(1.0), p(2.0), bad]).is_err());
    }

    #[test]
    fn slepian_holds_constant_boundary() {
        let b = parse_boundary("1").unwrap();
        let cfg = SimConfig::new(40_000, 500, 10.0, 8);
        let check = slepian_check(&b, 1.0, 10.0, &cfg).unwrap();
        // exact full-window probability: 2 Phi(1/sqrt(10)) - 1
        assert!((check.p_full - 0.2481703659541507).abs() < 4.0 * check.p_full_std_err);
        assert!(check.holds, "margin = {}", check.margin);
        assert!(check.product <= check.p_full + 3.0 * check.product_std_err);
    }

    #[test]
    fn slepian_rejects_bad_split() {
        let b = parse_boundary("1").unwrap();
        let cfg = SimConfig::new(100, 10, 1.0, 8);
        assert!(slepian_check(&b, 0.0, 1.0, &cfg).is_err());
        assert!(slepian_check(&b, 1.0, 1.0, &cfg).is_err());
    }
}
