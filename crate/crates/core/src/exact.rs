//! Closed-form and quadrature-exact quantities for constant boundaries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{norm_cdf, norm_pdf_var};
use crate::quad;

/// `P(sup_{t <= T} B_t <= a) = 2 Phi(a / sqrt(T)) - 1` by the reflection
/// principle; 1 for `T = 0`.
pub fn p_const_exact(a: f64, t_horizon: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("level a must be positive, got {}", a)));
    }
    if !(t_horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon must be nonnegative, got {}", t_horizon)));
    }
    if t_horizon == 0.0 {
        return Ok(1.0);
    }
    Ok(2.0 * norm_cdf(a / t_horizon.sqrt()) - 1.0)
}

/// Mean of `B_u` conditioned on `sup_{t <= T} B_t <= a`, with the implied
/// repulsion ratio `-mean / sqrt(u)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionedMeanReport {
    pub u: f64,
    pub t_horizon: f64,
    pub a: f64,
    pub mean: f64,
    /// `max(0, -mean / sqrt(u))` for this point.
    pub minimal_c_observed: f64,
}

/// `E[B_u | sup_{t <= T} B_t <= a]` by quadrature.
///
/// The integrand factorizes through the Markov property at time `u`:
/// the sub-maximum density `p_u(x) = phi_u(x) - phi_u(2a - x)` (reflection)
/// times the forward survival factor `q_{T-u}(x) = 2 Phi((a-x)/sqrt(T-u)) - 1`
/// (and `q_0 = 1`). Both integrals are truncated 12 standard deviations below
/// `min(a, 0)`, keeping the normalization error under 1e-12 relative.
pub fn conditioned_mean(u: f64, t_horizon: f64, a: f64) -> Result<ConditionedMeanReport> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("level a must be positive, got {}", a)));
    }
    if !(u > 0.0) {
        return Err(Error::Domain(format!("time u must be positive, got {}", u)));
    }
    if !(u <= t_horizon) {
        return Err(Error::Domain(format!(
            "time u = {} must not exceed the horizon T = {}",
            u, t_horizon
        )));
    }

    let s = t_horizon - u;
    let sqrt_s = s.sqrt();
    let sub_max_density = move |x: f64| norm_pdf_var(x, u) - norm_pdf_var(2.0 * a - x, u);
    let forward_survival = move |x: f64| {
        if s > 0.0 {
            2.0 * norm_cdf((a - x) / sqrt_s) - 1.0
        } else {
            1.0
        }
    };

    let lower = a.min(0.0) - 12.0 * t_horizon.sqrt();
    // breakpoints bracketing the B_u density, which concentrates in a band
    // of width sqrt(u) around 0 and can be far narrower than [lower, a]
    let sigma_u = u.sqrt();
    let mut points = vec![lower, -12.0 * sigma_u, 0.0, 12.0 * sigma_u, a];
    points.retain(|&x| x >= lower && x <= a);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let numerator = quad::integrate_segments(
        |x| x * sub_max_density(x) * forward_survival(x),
        &points,
        1e-14,
        1e-10,
        4000,
    )
    .value;
    let denominator = quad::integrate_segments(
        |x| sub_max_density(x) * forward_survival(x),
        &points,
        1e-14,
        1e-10,
        4000,
    )
    .value;

    let mean = numerator / denominator;
    Ok(ConditionedMeanReport {
        u,
        t_horizon,
        a,
        mean,
        minimal_c_observed: (-mean / u.sqrt()).max(0.0),
    })
}

/// Scan `-E[B_u | sup <= a] / sqrt(u)` over a grid of horizons, 50 (or
/// `u_per_t`) log-spaced `u` values in `[1e-3 T, T]` each, and return the
/// supremum: the empirical minimal repulsion constant.
pub fn minimal_c_scan(a: f64, t_grid: &[f64], u_per_t: usize) -> Result<f64> {
    if u_per_t < 2 {
        return Err(Error::Domain(format!("u_per_t must be at least 2, got {}", u_per_t)));
    }
    if t_grid.is_empty() {
        return Err(Error::Domain("horizon grid must be nonempty".into()));
    }
    let mut sup = 0.0f64;
    for &t_horizon in t_grid {
        if !(t_horizon > 0.0) {
            return Err(Error::Domain(format!("horizon must be positive, got {}", t_horizon)));
        }
        let lo = (1e-3 * t_horizon).ln();
        let hi = t_horizon.ln();
        for i in 0..u_per_t {
            let frac = i as f64 / (u_per_t - 1) as f64;
            let u = (lo + frac * (hi - lo)).exp().min(t_horizon);
            let report = conditioned_mean(u, t_horizon, a)?;
            sup = sup.max(report.minimal_c_observed);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SQRT_2_OVER_PI;

    #[test]
    fn p_const_reference_values() {
        // frozen: 2 Phi(1) - 1
        assert!((p_const_exact(1.0, 1.0).unwrap() - 0.6826894921370859).abs() < 1e-12);
        assert_eq!(p_const_exact(1.0, 0.0).unwrap(), 1.0);
        // frozen: erf(0.01 / sqrt(2)); close to sqrt(2/pi) * 1e-2
        let p = p_const_exact(1.0, 1e4).unwrap();
        assert!((p - 0.007978712629263207).abs() < 1e-14);
        assert!((1e2 * p - SQRT_2_OVER_PI).abs() < 2e-5 * SQRT_2_OVER_PI);
    }

    #[test]
    fn p_const_domain_errors() {
        assert!(p_const_exact(0.0, 1.0).is_err());
        assert!(p_const_exact(-1.0, 1.0).is_err());
        assert!(p_const_exact(1.0, -0.5).is_err());
    }

    #[test]
    fn p_const_monotone_grid() {
        // strictly increasing in a, strictly decreasing in T, on a 20x20 grid
        let levels: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
        let horizons: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
        for (i, &a) in levels.iter().enumerate() {
            for (j, &t) in horizons.iter().enumerate() {
                let p = p_const_exact(a, t).unwrap();
                if i > 0 {
                    assert!(p > p_const_exact(levels[i - 1], t).unwrap());
                }
                if j > 0 {
                    assert!(p < p_const_exact(a, horizons[j - 1]).unwrap());
                }
            }
        }
    }

    #[test]
    fn p_const_asymptotic_rate() {
        // sqrt(T) * p -> sqrt(2/pi) * a, within 1e-3 * a at T = 1e6
        for a in [0.5, 1.0, 2.0] {
            let p = p_const_exact(a, 1e6).unwrap();
            assert!(
                (1e3 * p - SQRT_2_OVER_PI * a).abs() < 1e-3 * a,
                "a = {}: sqrt(T) p = {}",
                a,
                1e3 * p
            );
        }
    }

    #[test]
    fn conditioned_mean_at_endpoint_closed_form() {
        // u = T: mean = -2a(1 - Phi(a/sqrt(T))) / (2 Phi(a/sqrt(T)) - 1);
        // frozen for a = T = 1 at -0.4647947734915441
        let r = conditioned_mean(1.0, 1.0, 1.0).unwrap();
        assert!((r.mean + 0.4647947734915441).abs() < 1e-9, "mean = {}", r.mean);
        assert!(r.minimal_c_observed > 0.0);
    }

    #[test]
    fn conditioned_mean_interior_frozen() {
        // frozen by high-precision quadrature of the same densities
        let r = conditioned_mean(0.5, 1.0, 1.0).unwrap();
        assert!((r.mean + 0.31571285733345834).abs() < 1e-8, "mean = {}", r.mean);
    }

    #[test]
    fn conditioned_mean_small_u_vanishes() {
        let r = conditioned_mean(1e-8, 1.0, 1.0).unwrap();
        assert!(r.mean.abs() < 1e-4, "mean = {}", r.mean);
    }

    #[test]
    fn conditioned_mean_vacuous_for_large_level() {
        let r = conditioned_mean(1.0, 1.0, 50.0).unwrap();
        assert!(r.mean.abs() < 1e-9, "mean = {}", r.mean);
    }

    #[test]
    fn conditioned_mean_nonpositive_and_monotone_in_a() {
        let mut prev = f64::NEG_INFINITY;
        for a in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let r = conditioned_mean(0.7, 1.3, a).unwrap();
            assert!(r.mean <= 1e-12, "mean = {} at a = {}", r.mean, a);
            assert!(r.mean >= prev, "mean not nondecreasing in a");
            prev = r.mean;
        }
    }

    #[test]
    fn conditioned_mean_domain_errors() {
        assert!(conditioned_mean(0.0, 1.0, 1.0).is_err());
        assert!(conditioned_mean(2.0, 1.0, 1.0).is_err());
        assert!(conditioned_mean(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn scan_brownian_scaling() {
        // scan(a, T) == scan(a*lambda, T*lambda^2)
        let base = minimal_c_scan(1.0, &[1.0], 20).unwrap();
        let scaled = minimal_c_scan(3.0, &[9.0], 20).unwrap();
        assert!((base - scaled).abs() < 1e-8, "{} vs {}", base, scaled);
    }

    #[test]
    fn scan_vacuous_for_large_level() {
        let c = minimal_c_scan(100.0, &[1.0], 10).unwrap();
        assert!(c < 1e-9, "c = {}", c);
    }
}
