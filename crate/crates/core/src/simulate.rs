//! Monte Carlo engine for one-sided exit probabilities.
//!
//! Paths are Euler walks `X_{i+1} = X_i + sqrt(dt) Z_i` on a uniform grid.
//! With the bridge correction enabled, a step whose endpoints both sit below
//! the boundary is additionally killed with the Brownian-bridge crossing
//! probability `exp(-2 g_i g_{i+1} / dt)` (gaps `g = f - X`), which removes
//! the leading discrete-monitoring bias; for constant boundaries the
//! corrected survival indicator is exact in distribution.
//!
//! Work is split into path chunks executed in parallel. Every path draws
//! from its own stream keyed by `(seed, path index)` and chunk results are
//! folded in index order, so estimates are bit-identical for any thread
//! count.

use rand::RngExt;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{self, BoundaryFunction, Verdict};
use crate::error::{Error, Result};
use crate::math::SQRT_2_OVER_PI;
use crate::rng::path_rng;

/// Simulation parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    pub n_paths: u64,
    pub n_steps: u64,
    pub t_horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
    /// Paths per parallel work unit; part of the reproducibility contract
    /// only through the (order-independent) aggregation, not the draws.
    pub chunk_size: u64,
}

impl SimConfig {
    pub fn new(n_paths: u64, n_steps: u64, t_horizon: f64, seed: u64) -> Self {
        SimConfig {
            n_paths,
            n_steps,
            t_horizon,
            seed,
            bridge_correction: true,
            chunk_size: 16_384,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if self.n_steps < 1 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if !(self.t_horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.t_horizon
            )));
        }
        if self.chunk_size < 1 {
            return Err(Error::Config("chunk_size must be at least 1".into()));
        }
        Ok(())
    }

    fn dt(&self) -> f64 {
        self.t_horizon / self.n_steps as f64
    }

    /// Grid times `i * T / n` hitting the horizon exactly.
    fn times(&self) -> Vec<f64> {
        let n = self.n_steps;
        (0..=n)
            .map(|i| self.t_horizon * i as f64 / n as f64)
            .collect()
    }
}

/// Which estimator produced an [`ExitEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Direct,
    Girsanov,
}

/// Monte Carlo estimate of `P(B_t <= f(t), t <= T)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExitEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_paths: u64,
    pub estimator: Estimator,
    /// `(sum w)^2 / sum w^2`; present for the weighted estimator only.
    pub effective_sample_size: Option<f64>,
}

/// First grid-detected boundary hit of one path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TauSample {
    /// Hitting time, or the horizon when censored.
    pub tau: f64,
    pub censored: bool,
    /// `f(tau)` (boundary value at the censor time when censored).
    pub f_at_tau: f64,
}

/// Run `per_chunk` over path-index chunks in parallel; results come back in
/// chunk order so sequential folding is reproducible.
fn run_chunks<S, F>(cfg: &SimConfig, per_chunk: F) -> Vec<S>
where
    S: Send,
    F: Fn(std::ops::Range<u64>) -> S + Sync,
{
    let n = cfg.n_paths;
    let size = cfg.chunk_size;
    let n_chunks = n.div_ceil(size);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * size;
            let hi = (lo + size).min(n);
            per_chunk(lo..hi)
        })
        .collect()
}

/// Walk one path against precomputed boundary values. Returns `None` when
/// the path survives to the horizon, else the crossing description
/// `(step index i, previous gap, gap at t_i, crossed_inside_step)`.
#[inline]
fn walk_path<R: RngExt>(
    rng: &mut R,
    fvals: &[f64],
    dt: f64,
    sqrt_dt: f64,
    bridge: bool,
) -> std::result::Result<(), (usize, f64, f64, bool)> {
    let mut x = 0.0f64;
    let mut gap_prev = fvals[0];
    for (i, &fv) in fvals.iter().enumerate().skip(1) {
        let z: f64 = rng.sample(StandardNormal);
        x += sqrt_dt * z;
        let gap = fv - x;
        if gap < 0.0 {
            return Err((i, gap_prev, gap, false));
        }
        if bridge {
            let e: f64 = rng.sample(Exp1);
            if e > 2.0 * gap_prev * gap / dt {
                return Err((i, gap_prev, gap, true));
            }
        }
        gap_prev = gap;
    }
    Ok(())
}

/// Direct estimator: surviving fraction of corrected Euler paths.
pub fn estimate_exit_direct(b: &BoundaryFunction, cfg: &SimConfig) -> Result<ExitEstimate> {
    cfg.validate()?;
    let times = cfg.times();
    let fvals: Vec<f64> = times.iter().map(|&t| b.value(t)).collect();
    let dt = cfg.dt();
    let sqrt_dt = dt.sqrt();
    let bridge = cfg.bridge_correction;
    let seed = cfg.seed;

    let counts = run_chunks(cfg, |range| {
        let mut survivors = 0u64;
        for p in range {
            let mut rng = path_rng(seed, p);
            if walk_path(&mut rng, &fvals, dt, sqrt_dt, bridge).is_ok() {
                survivors += 1;
            }
        }
        survivors
    });
    let survivors: u64 = counts.iter().sum();
    let n = cfg.n_paths as f64;
    let p_hat = survivors as f64 / n;
    let std_err = (p_hat * (1.0 - p_hat) / n).sqrt();
    Ok(ExitEstimate {
        p_hat,
        std_err,
        n_paths: cfg.n_paths,
        estimator: Estimator::Direct,
        effective_sample_size: None,
    })
}

/// Change-of-measure estimator: paths are simulated against the constant
/// level `f(0)` and surviving paths carry the exponential weight
/// `exp(-f'(T) X_T + int_0^T X_s f''(s) ds - 1/2 int_0^T f'(s)^2 ds)`,
/// the stochastic integral having been rewritten by parts so only `f''`
/// appears under a (trapezoidal) time integral. Weights are assembled in
/// log space.
pub fn estimate_exit_girsanov(b: &BoundaryFunction, cfg: &SimConfig) -> Result<ExitEstimate> {
    cfg.validate()?;
    let level = b.value(0.0);
    let times = cfg.times();
    let n_steps = cfg.n_steps as usize;
    let dt = cfg.dt();
    let sqrt_dt = dt.sqrt();
    let bridge = cfg.bridge_correction;
    let seed = cfg.seed;

    // trapezoid coefficients for int X f'' ds; the t=0 endpoint drops out
    // because X_0 = 0
    let trap: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let w = if i == 0 || i == n_steps { 0.5 } else { 1.0 };
            w * b.deriv2(t) * dt
        })
        .collect();
    let fprime_t = b.deriv1(cfg.t_horizon);
    let (int_fprime_sq, _, _) = boundary::exponent_integrals(b, cfg.t_horizon);
    let half_drift = 0.5 * int_fprime_sq;

    let partials = run_chunks(cfg, |range| {
        let mut sum_w = 0.0f64;
        let mut sum_w2 = 0.0f64;
        for p in range {
            let mut rng = path_rng(seed, p);
            let mut x = 0.0f64;
            let mut gap_prev = level;
            let mut acc = 0.0f64;
            let mut alive = true;
            for &trap_w in trap.iter().skip(1) {
                let z: f64 = rng.sample(StandardNormal);
                x += sqrt_dt * z;
                let gap = level - x;
                if gap < 0.0 {
                    alive = false;
                    break;
                }
                if bridge {
                    let e: f64 = rng.sample(Exp1);
                    if e > 2.0 * gap_prev * gap / dt {
                        alive = false;
                        break;
                    }
                }
                acc += x * trap_w;
                gap_prev = gap;
            }
            if alive {
                let log_w = -fprime_t * x + acc - half_drift;
                let w = log_w.exp();
                sum_w += w;
                sum_w2 += w * w;
            }
        }
        (sum_w, sum_w2)
    });

    let mut sum_w = 0.0f64;
    let mut sum_w2 = 0.0f64;
    for (a, b2) in partials {
        sum_w += a;
        sum_w2 += b2;
    }
    let n = cfg.n_paths as f64;
    let p_hat = sum_w / n;
    let var = ((sum_w2 - n * p_hat * p_hat) / (n - 1.0).max(1.0)).max(0.0);
    let std_err = (var / n).sqrt();
    let ess = if sum_w2 > 0.0 { sum_w * sum_w / sum_w2 } else { 0.0 };
    Ok(ExitEstimate {
        p_hat,
        std_err,
        n_paths: cfg.n_paths,
        estimator: Estimator::Girsanov,
        effective_sample_size: Some(ess),
    })
}

/// First-passage samples for every path: the first grid time at which
/// `X >= f`, refined inside the step by linear interpolation of the gap
/// process (and, when the bridge correction is on, by the within-step
/// crossing kill, placed at the gap-weighted interior point). Paths that
/// never cross are censored at the horizon.
pub fn sample_tau(b: &BoundaryFunction, cfg: &SimConfig) -> Result<Vec<TauSample>> {
    cfg.validate()?;
    let times = cfg.times();
    let fvals: Vec<f64> = times.iter().map(|&t| b.value(t)).collect();
    let dt = cfg.dt();
    let sqrt_dt = dt.sqrt();
    let bridge = cfg.bridge_correction;
    let seed = cfg.seed;
    let t_horizon = cfg.t_horizon;

    let chunks = run_chunks(cfg, |range| {
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for p in range {
            let mut rng = path_rng(seed, p);
            let sample = match walk_path(&mut rng, &fvals, dt, sqrt_dt, bridge) {
                Ok(()) => TauSample {
                    tau: t_horizon,
                    censored: true,
                    f_at_tau: fvals[fvals.len() - 1],
                },
                Err((i, gap_prev, gap, inside)) => {
                    let t_prev = times[i - 1];
                    let frac = if inside {
                        // bridge-detected crossing: both gaps positive;
                        // weight toward the tighter side
                        gap_prev / (gap_prev + gap)
                    } else {
                        // grid crossing: gap <= 0 < gap_prev
                        gap_prev / (gap_prev - gap)
                    };
                    let tau = t_prev + dt * frac;
                    TauSample { tau, censored: false, f_at_tau: b.value(tau) }
                }
            };
            out.push(sample);
        }
        out
    });
    let mut all = Vec::with_capacity(cfg.n_paths as usize);
    for c in chunks {
        all.extend(c);
    }
    Ok(all)
}

/// One horizon of a limit-constant comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NovikovPoint {
    pub t: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub scaled: f64,
    pub scaled_std_err: f64,
}

/// Comparison of `sqrt(T) P(survive to T)` against
/// `sqrt(2/pi) E[f(tau)]` from the same first-passage run.
#[derive(Debug, Clone, Serialize)]
pub struct NovikovReport {
    pub points: Vec<NovikovPoint>,
    /// `sqrt(T) p_hat` at the largest horizon.
    pub lhs: f64,
    pub lhs_std_err: f64,
    /// `sqrt(2/pi) * mean f(tau)`, censored paths contributing the boundary
    /// value at their censor time.
    pub rhs: f64,
    pub rhs_std_err: f64,
    pub censor_fraction: f64,
    /// Set when censoring exceeds 1%: the `E f(tau)` estimate leans on the
    /// documented censor-time extension.
    pub censoring_flagged: bool,
    /// Set when the boundary fails (or cannot be certified by) the integral
    /// test, under which the limit statement has no support.
    pub integral_test_warning: bool,
}

/// Estimate both sides of the limit `sqrt(T) P(B <= f on [0,T]) ->
/// sqrt(2/pi) E[f(tau)]` at the largest horizon of `t_grid`, with the
/// survival trend at the smaller horizons read off the same samples.
pub fn estimate_novikov_limit(
    b: &BoundaryFunction,
    cfg: &SimConfig,
    t_grid: &[f64],
) -> Result<NovikovReport> {
    if t_grid.is_empty() {
        return Err(Error::Config("horizon grid must be nonempty".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Config("horizon grid must be strictly increasing".into()));
        }
    }
    if !(t_grid[0] > 0.0) {
        return Err(Error::Config("horizons must be positive".into()));
    }

    let t_max = *t_grid.last().unwrap();
    let mut run_cfg = *cfg;
    run_cfg.t_horizon = t_max;

    let integral_test_warning =
        boundary::integral_test(b, 1e-6).verdict != Verdict::Convergent;

    let samples = sample_tau(b, &run_cfg)?;
    let n = samples.len() as f64;

    let points: Vec<NovikovPoint> = t_grid
        .iter()
        .map(|&t| {
            let surv = samples.iter().filter(|s| s.censored || s.tau > t).count() as f64;
            let p_hat = surv / n;
            let std_err = (p_hat * (1.0 - p_hat) / n).sqrt();
            NovikovPoint {
                t,
                p_hat,
                std_err,
                scaled: t.sqrt() * p_hat,
                scaled_std_err: t.sqrt() * std_err,
            }
        })
        .collect();

    let sum: f64 = samples.iter().map(|s| s.f_at_tau).sum();
    let sum_sq: f64 = samples.iter().map(|s| s.f_at_tau * s.f_at_tau).sum();
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    let rhs = SQRT_2_OVER_PI * mean;
    let rhs_std_err = SQRT_2_OVER_PI * (var / n).sqrt();

    let censor_fraction =
        samples.iter().filter(|s| s.censored).count() as f64 / n;
    let last = points.last().unwrap();
    Ok(NovikovReport {
        lhs: last.scaled,
        lhs_std_err: last.scaled_std_err,
        rhs,
        rhs_std_err,
        censor_fraction,
        censoring_flagged: censor_fraction > 0.01,
        integral_test_warning,
        points,
    })
}

/// Monte Carlo mean of the modulus of a three-dimensional Brownian motion
/// at time `s`; the expectation is `sqrt(s) * 2 sqrt(2/pi)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesselEstimate {
    pub s: f64,
    pub mean: f64,
    pub std_err: f64,
    pub n_paths: u64,
}

pub fn bessel_mean(s: f64, cfg: &SimConfig) -> Result<BesselEstimate> {
    if !(s > 0.0) {
        return Err(Error::Config(format!("time s must be positive, got {}", s)));
    }
    cfg.validate()?;
    let seed = cfg.seed;
    let sqrt_s = s.sqrt();
    let partials = run_chunks(cfg, |range| {
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for p in range {
            let mut rng = path_rng(seed, p);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let z3: f64 = rng.sample(StandardNormal);
            let r = sqrt_s * (z1 * z1 + z2 * z2 + z3 * z3).sqrt();
            sum += r;
            sum_sq += r * r;
        }
        (sum, sum_sq)
    });
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for (a, b2) in partials {
        sum += a;
        sum_sq += b2;
    }
    let n = cfg.n_paths as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    Ok(BesselEstimate { s, mean, std_err: (var / n).sqrt(), n_paths: cfg.n_paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::parse_boundary;
    use crate::exact::p_const_exact;
    use crate::math::BESSEL3_MEAN;

    fn cfg(n_paths: u64, n_steps: u64, t: f64, seed: u64) -> SimConfig {
        SimConfig::new(n_paths, n_steps, t, seed)
    }

    #[test]
    fn config_validation() {
        let b = parse_boundary("1").unwrap();
        assert!(estimate_exit_direct(&b, &cfg(0, 10, 1.0, 1)).is_err());
        assert!(estimate_exit_direct(&b, &cfg(10, 0, 1.0, 1)).is_err());
        assert!(estimate_exit_direct(&b, &cfg(10, 10, 0.0, 1)).is_err());
    }

    #[test]
    fn unreachable_boundary_survives_everything() {
        let b = parse_boundary("1000000").unwrap();
        let est = estimate_exit_direct(&b, &cfg(2_000, 1, 1.0, 7)).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn direct_matches_reflection_principle() {
        let b = parse_boundary("1").unwrap();
        let est = estimate_exit_direct(&b, &cfg(200_000, 200, 1.0, 11)).unwrap();
        let exact = p_const_exact(1.0, 1.0).unwrap();
        assert!(
            (est.p_hat - exact).abs() < 3.0 * est.std_err,
            "p_hat = {} exact = {} se = {}",
            est.p_hat,
            exact,
            est.std_err
        );
    }

    #[test]
    fn correction_only_kills() {
        let b = parse_boundary("1").unwrap();
        let mut on = cfg(50_000, 100, 1.0, 3);
        let mut off = on;
        on.bridge_correction = true;
        off.bridge_correction = false;
        let p_on = estimate_exit_direct(&b, &on).unwrap().p_hat;
        let p_off = estimate_exit_direct(&b, &off).unwrap().p_hat;
        assert!(p_on <= p_off, "correction added paths: {} > {}", p_on, p_off);
    }

    #[test]
    fn common_random_numbers_monotone_pathwise() {
        // f <= g pointwise: every path surviving under f survives under g
        let f = parse_boundary("1 - ln(1+t)").unwrap();
        let g = parse_boundary("1").unwrap();
        let c = cfg(20_000, 300, 20.0, 99);
        let tf = sample_tau(&f, &c).unwrap();
        let tg = sample_tau(&g, &c).unwrap();
        for (i, (a, b2)) in tf.iter().zip(tg.iter()).enumerate() {
            if a.censored {
                assert!(b2.censored, "path {} survived under f but not under g", i);
            }
        }
        let pf = tf.iter().filter(|s| s.censored).count();
        let pg = tg.iter().filter(|s| s.censored).count();
        assert!(pf <= pg);
    }

    #[test]
    fn determinism_across_thread_counts() {
        let b = parse_boundary("1 - ln(1+t)").unwrap();
        let c = cfg(30_000, 200, 10.0, 5);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate_exit_direct(&b, &c).unwrap().p_hat)
        };
        let p1 = run(1);
        let p2 = run(2);
        let p4 = run(4);
        assert_eq!(p1.to_bits(), p2.to_bits());
        assert_eq!(p1.to_bits(), p4.to_bits());
    }

    #[test]
    fn girsanov_constant_boundary_coincides_bitwise() {
        let b = parse_boundary("1").unwrap();
        let c = cfg(40_000, 100, 1.0, 21);
        let d = estimate_exit_direct(&b, &c).unwrap();
        let g = estimate_exit_girsanov(&b, &c).unwrap();
        assert_eq!(d.p_hat.to_bits(), g.p_hat.to_bits());
        // unit weights: effective sample size equals the survivor count
        let ess = g.effective_sample_size.unwrap();
        assert!((ess - d.p_hat * c.n_paths as f64).abs() < 1e-6);
    }

    #[test]
    fn girsanov_agrees_with_direct_exp_boundary() {
        let b = parse_boundary("1 + exp(-1*t)").unwrap();
        let c = cfg(60_000, 500, 10.0, 13);
        let d = estimate_exit_direct(&b, &c).unwrap();
        let g = estimate_exit_girsanov(&b, &c).unwrap();
        let combined = (d.std_err.powi(2) + g.std_err.powi(2)).sqrt();
        assert!(
            (d.p_hat - g.p_hat).abs() < 3.0 * combined,
            "direct {} +- {} vs girsanov {} +- {}",
            d.p_hat,
            d.std_err,
            g.p_hat,
            g.std_err
        );
        assert!(g.effective_sample_size.unwrap() <= c.n_paths as f64);
    }

    #[test]
    fn tau_samples_in_range_and_constant_level() {
        let b = parse_boundary("2").unwrap();
        let c = cfg(5_000, 200, 4.0, 17);
        let samples = sample_tau(&b, &c).unwrap();
        assert_eq!(samples.len(), 5_000);
        for s in &samples {
            assert!(s.tau > 0.0 && s.tau <= 4.0);
            assert_eq!(s.f_at_tau, 2.0);
            if !s.censored {
                assert!(s.tau <= 4.0);
            }
        }
    }

    #[test]
    fn tau_censoring_bounded_by_survival() {
        // boundary tends to -inf, so censoring is rare by T = 1e4
        let b = parse_boundary("1 - ln(1+t)").unwrap();
        let c = cfg(20_000, 4_000, 1e4, 29);
        let samples = sample_tau(&b, &c).unwrap();
        let censored = samples.iter().filter(|s| s.censored).count() as f64 / 20_000.0;
        let cap = 2.0 * p_const_exact(1.0, 1e4).unwrap();
        assert!(censored < cap, "censoring {} exceeds {}", censored, cap);
    }

    #[test]
    fn novikov_constant_boundary() {
        let b = parse_boundary("1").unwrap();
        let c = cfg(150_000, 2_000, 1.0, 31);
        let rep = estimate_novikov_limit(&b, &c, &[100.0, 400.0]).unwrap();
        // rhs is exactly sqrt(2/pi) * 1 for a constant boundary
        assert!((rep.rhs - SQRT_2_OVER_PI).abs() < 1e-12);
        assert_eq!(rep.rhs_std_err, 0.0);
        assert!(
            (rep.lhs - rep.rhs).abs() < 3.0 * rep.lhs_std_err + 0.05,
            "lhs = {} rhs = {}",
            rep.lhs,
            rep.rhs
        );
        assert!(!rep.integral_test_warning);
    }

    #[test]
    fn novikov_constant_two_scales_rhs() {
        let b = parse_boundary("2").unwrap();
        let c = cfg(1_000, 50, 1.0, 31);
        let rep = estimate_novikov_limit(&b, &c, &[4.0]).unwrap();
        assert!((rep.rhs - 2.0 * SQRT_2_OVER_PI).abs() < 1e-12);
    }

    #[test]
    fn bessel_mean_matches_constant() {
        let c = cfg(200_000, 1, 1.0, 12);
        let est = bessel_mean(1.0, &c).unwrap();
        assert!(
            (est.mean - BESSEL3_MEAN).abs() < 3.0 * est.std_err,
            "mean = {} se = {}",
            est.mean,
            est.std_err
        );
        let est4 = bessel_mean(4.0, &c).unwrap();
        let combined = (4.0 * est.std_err.powi(2) + est4.std_err.powi(2)).sqrt();
        assert!((est4.mean - 2.0 * est.mean).abs() < 3.0 * combined);
        assert!(est.mean > 0.0);
    }
}
