//! Command-line front end: every library operation as a subcommand with
//! reproducible configuration and machine-readable reports.

// validation deliberately uses `!(x > 0.0)` so NaN inputs fail closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use exitprob::math::BESSEL3_MEAN;
use exitprob::{
    bessel_mean, conditioned_mean, estimate_exit_direct, estimate_exit_girsanov,
    estimate_novikov_limit, fit_rate_exponent, integral_test, lower_bound, minimal_c_scan,
    p_const_exact, parse_boundary, sample_tau, slepian_check, verify_lower_bound, Error,
    RatePoint, SimConfig,
};
use report::{num, CommandOutput, Format};

#[derive(Parser)]
#[command(
    name = "exitprob",
    version,
    about = "Survival probabilities of Brownian motion below a one-sided moving boundary",
    after_help = "Boundary grammar: sums/differences of `c`, `c*(1+t)^g`, `c*ln(1+t)`, \
                  `c*exp(-l*t)` with decimal literals, f(0) > 0 required.\n\
                  Horizon grids: `a:b:n` (n log-spaced points) or comma-separated values.\n\
                  Thread count honors RAYON_NUM_THREADS; reports are bit-identical \
                  for any value."
)]
struct Cli {
    /// Output format for the run report
    #[arg(long, global = true, value_enum, default_value_t = CliFormat::Json)]
    format: CliFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    Direct,
    Girsanov,
    Both,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Number of Monte Carlo paths (scientific notation accepted)
    #[arg(long, value_parser = parse_count, default_value = "1e5")]
    paths: u64,
    /// Time steps per path
    #[arg(long, value_parser = parse_count, default_value = "1e3")]
    steps: u64,
    /// Step size; when set, overrides --steps as ceil(T / dt)
    #[arg(long)]
    dt: Option<f64>,
    /// RNG seed; identical seeds reproduce reports bit-exactly
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Disable the within-step Brownian-bridge crossing correction
    #[arg(long)]
    no_bridge: bool,
    /// Paths per parallel work unit
    #[arg(long, value_parser = parse_count, default_value = "16384")]
    chunk_size: u64,
}

impl SimArgs {
    fn config(&self, t_horizon: f64) -> SimConfig {
        let n_steps = match self.dt {
            Some(dt) if dt > 0.0 => (t_horizon / dt).ceil().max(1.0) as u64,
            _ => self.steps,
        };
        SimConfig {
            n_paths: self.paths,
            n_steps,
            t_horizon,
            seed: self.seed,
            bridge_correction: !self.no_bridge,
            chunk_size: self.chunk_size,
        }
    }

    fn echo(&self, cfg: &SimConfig) -> Value {
        json!({
            "paths": cfg.n_paths,
            "steps": cfg.n_steps,
            "t_horizon": cfg.t_horizon,
            "seed": cfg.seed,
            "bridge_correction": cfg.bridge_correction,
            "chunk_size": cfg.chunk_size,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integral test plus the lower-bound exponent integrals for a boundary
    Classify {
        #[arg(long)]
        boundary: String,
        /// Horizon for the exponent integrals
        #[arg(long, default_value_t = 100.0)]
        t_horizon: f64,
        /// Stabilization tolerance for the integral test
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Closed-form constant-boundary survival probability
    Exact {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        t_horizon: f64,
    },
    /// Conditioned mean E[B_u | sup B <= a], or the minimal-c scan
    Mean {
        #[arg(long)]
        a: f64,
        /// Time of the conditioned mean (single-point mode)
        #[arg(long, conflicts_with = "scan")]
        u: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_horizon: f64,
        /// Scan -mean/sqrt(u) over the horizon grid instead
        #[arg(long)]
        scan: bool,
        /// Horizon grid for --scan
        #[arg(long, default_value = "1,10,100")]
        t_grid: String,
        /// Log-spaced u points per horizon in the scan
        #[arg(long, default_value_t = 50)]
        u_per_t: usize,
    },
    /// Monte Carlo exit estimate (direct and/or Girsanov-weighted)
    Estimate {
        #[arg(long)]
        boundary: String,
        #[arg(long, default_value_t = 1.0)]
        t_horizon: f64,
        #[arg(long, value_enum, default_value_t = EstimatorKind::Direct)]
        estimator: EstimatorKind,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Explicit survival lower bound, optionally verified by Monte Carlo
    Bound {
        #[arg(long)]
        boundary: String,
        #[arg(long)]
        t_horizon: f64,
        #[arg(long, default_value_t = BESSEL3_MEAN)]
        c1: f64,
        #[arg(long, default_value_t = BESSEL3_MEAN)]
        c2: f64,
        /// Also check p_hat + 3 std_err >= lower_bound by simulation
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Sweep horizons, estimate exit probabilities, fit the decay exponent
    Rate {
        #[arg(long)]
        boundary: String,
        #[arg(long, default_value = "1e2:1e4:5")]
        t_grid: String,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Compare sqrt(T) P(survive) against sqrt(2/pi) E f(tau)
    Novikov {
        #[arg(long)]
        boundary: String,
        #[arg(long, default_value = "1e1:1e3:3")]
        t_grid: String,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Check the product inequality across a time split t0
    Slepian {
        #[arg(long)]
        boundary: String,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t_horizon: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Mean modulus of three-dimensional Brownian motion at time s
    Bessel {
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// First-passage samples: censoring fraction and E f(tau)
    Tau {
        #[arg(long)]
        boundary: String,
        #[arg(long, default_value_t = 100.0)]
        t_horizon: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{}` is not a number", s))?;
    if !(v >= 1.0) || (v - v.round()).abs() > 1e-6 {
        return Err(format!("`{}` is not a positive integer count", s));
    }
    Ok(v.round() as u64)
}

/// `a:b:n` = n log-spaced points from a to b; otherwise comma-separated.
fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{}` must look like a:b:n", s));
        }
        let a: f64 = parts[0].parse().map_err(|_| format!("bad grid start `{}`", parts[0]))?;
        let b: f64 = parts[1].parse().map_err(|_| format!("bad grid end `{}`", parts[1]))?;
        let n: usize = parts[2].parse().map_err(|_| format!("bad grid count `{}`", parts[2]))?;
        if !(a > 0.0 && b > a && n >= 2) {
            return Err(format!("grid `{}` needs 0 < a < b and n >= 2", s));
        }
        let (la, lb) = (a.ln(), b.ln());
        Ok((0..n)
            .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
            .collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad grid value `{}`", p)))
            .collect()
    }
}

enum CliError {
    Lib(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type RunResult = Result<(&'static str, Value, CommandOutput, bool), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format {
        CliFormat::Json => Format::Json,
        CliFormat::Csv => Format::Csv,
    };
    let started = Instant::now();
    let run = match &cli.command {
        Command::Classify { boundary, t_horizon, tolerance } => {
            cmd_classify(boundary, *t_horizon, *tolerance)
        }
        Command::Exact { a, t_horizon } => cmd_exact(*a, *t_horizon),
        Command::Mean { a, u, t_horizon, scan, t_grid, u_per_t } => {
            cmd_mean(*a, *u, *t_horizon, *scan, t_grid, *u_per_t)
        }
        Command::Estimate { boundary, t_horizon, estimator, sim } => {
            cmd_estimate(boundary, *t_horizon, *estimator, sim)
        }
        Command::Bound { boundary, t_horizon, c1, c2, verify, sim } => {
            cmd_bound(boundary, *t_horizon, *c1, *c2, *verify, sim)
        }
        Command::Rate { boundary, t_grid, sim } => cmd_rate(boundary, t_grid, sim),
        Command::Novikov { boundary, t_grid, sim } => cmd_novikov(boundary, t_grid, sim),
        Command::Slepian { boundary, t0, t_horizon, sim } => {
            cmd_slepian(boundary, *t0, *t_horizon, sim)
        }
        Command::Bessel { s, sim } => cmd_bessel(*s, sim),
        Command::Tau { boundary, t_horizon, sim } => cmd_tau(boundary, *t_horizon, sim),
    };
    match run {
        Ok((name, inputs, output, ok)) => {
            let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
            report::emit(name, &inputs, &output, runtime_ms, format);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Lib(err)) => {
            eprintln!("error: {}", err);
            match err {
                Error::Hypothesis(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn cmd_classify(boundary: &str, t_horizon: f64, tolerance: f64) -> RunResult {
    if !(tolerance > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {}", tolerance)));
    }
    if !(t_horizon > 0.0) {
        return Err(CliError::Usage(format!("horizon must be positive, got {}", t_horizon)));
    }
    let b = parse_boundary(boundary)?;
    let r = integral_test(&b, tolerance);
    let (i1, i2, i3) = exitprob::exponent_integrals(&b, t_horizon);
    let verdict = format!("{:?}", r.verdict).to_lowercase();
    let inputs = json!({
        "boundary": boundary,
        "t_horizon": t_horizon,
        "tolerance": tolerance,
    });
    let outputs = json!({
        "verdict": verdict,
        "value": r.value,
        "tail_estimate": r.tail_estimate,
        "value_error_estimate": r.value_error_estimate,
        "doublings": r.partial_values.len(),
        "last_upper_limit": r.partial_values.last().map(|p| p.0),
        "int_fprime_sq": i1,
        "int_fpp_sqrt": i2,
        "sqrt_t_fprime_t": i3,
    });
    let row = vec![
        verdict.clone(),
        num(r.value),
        num(r.value_error_estimate),
        num(i1),
        num(i2),
        num(i3),
    ];
    Ok((
        "classify",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec![
                "verdict",
                "value",
                "value_error_estimate",
                "int_fprime_sq",
                "int_fpp_sqrt",
                "sqrt_t_fprime_t",
            ],
            csv_rows: vec![row],
        },
        true,
    ))
}

fn cmd_exact(a: f64, t_horizon: f64) -> RunResult {
    let p = p_const_exact(a, t_horizon)?;
    let inputs = json!({ "a": a, "t_horizon": t_horizon });
    let outputs = json!({ "p": p, "scaled": t_horizon.sqrt() * p, "tolerance": 0.0 });
    Ok((
        "exact",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec!["p", "scaled", "tolerance"],
            csv_rows: vec![vec![num(p), num(t_horizon.sqrt() * p), num(0.0)]],
        },
        true,
    ))
}

fn cmd_mean(
    a: f64,
    u: Option<f64>,
    t_horizon: f64,
    scan: bool,
    t_grid: &str,
    u_per_t: usize,
) -> RunResult {
    if scan {
        let grid = parse_grid(t_grid).map_err(CliError::Usage)?;
        let c = minimal_c_scan(a, &grid, u_per_t)?;
        let inputs = json!({ "a": a, "t_grid": grid, "u_per_t": u_per_t, "scan": true });
        let outputs = json!({
            "minimal_c": c,
            "bessel_reference": BESSEL3_MEAN,
            "quad_tolerance": 1e-10,
        });
        Ok((
            "mean",
            inputs,
            CommandOutput {
                outputs,
                csv_header: vec!["minimal_c", "bessel_reference", "quad_tolerance"],
                csv_rows: vec![vec![num(c), num(BESSEL3_MEAN), num(1e-10)]],
            },
            true,
        ))
    } else {
        let u = u.ok_or_else(|| CliError::Usage("--u is required without --scan".into()))?;
        let r = conditioned_mean(u, t_horizon, a)?;
        let inputs = json!({ "a": a, "u": u, "t_horizon": t_horizon, "scan": false });
        let outputs = json!({
            "mean": r.mean,
            "minimal_c_observed": r.minimal_c_observed,
            "quad_tolerance": 1e-10,
        });
        Ok((
            "mean",
            inputs,
            CommandOutput {
                outputs,
                csv_header: vec!["mean", "minimal_c_observed", "quad_tolerance"],
                csv_rows: vec![vec![num(r.mean), num(r.minimal_c_observed), num(1e-10)]],
            },
            true,
        ))
    }
}

fn estimator_name(e: exitprob::Estimator) -> &'static str {
    match e {
        exitprob::Estimator::Direct => "direct",
        exitprob::Estimator::Girsanov => "girsanov",
    }
}

fn estimate_json(est: &exitprob::ExitEstimate) -> Value {
    json!({
        "p_hat": est.p_hat,
        "std_err": est.std_err,
        "n_paths": est.n_paths,
        "estimator": estimator_name(est.estimator),
        "effective_sample_size": est.effective_sample_size,
    })
}

fn cmd_estimate(
    boundary: &str,
    t_horizon: f64,
    kind: EstimatorKind,
    sim: &SimArgs,
) -> RunResult {
    let b = parse_boundary(boundary)?;
    let cfg = sim.config(t_horizon);
    let mut results = Vec::new();
    match kind {
        EstimatorKind::Direct => results.push(estimate_exit_direct(&b, &cfg)?),
        EstimatorKind::Girsanov => results.push(estimate_exit_girsanov(&b, &cfg)?),
        EstimatorKind::Both => {
            results.push(estimate_exit_direct(&b, &cfg)?);
            results.push(estimate_exit_girsanov(&b, &cfg)?);
        }
    }
    let mut inputs = sim.echo(&cfg);
    inputs["boundary"] = json!(boundary);
    let outputs = json!({ "estimates": results.iter().map(estimate_json).collect::<Vec<_>>() });
    let rows = results
        .iter()
        .map(|e| {
            vec![
                estimator_name(e.estimator).to_string(),
                num(e.p_hat),
                num(e.std_err),
                e.n_paths.to_string(),
                e.effective_sample_size.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    Ok((
        "estimate",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec!["estimator", "p_hat", "std_err", "n_paths", "effective_sample_size"],
            csv_rows: rows,
        },
        true,
    ))
}

fn cmd_bound(
    boundary: &str,
    t_horizon: f64,
    c1: f64,
    c2: f64,
    verify: bool,
    sim: &SimArgs,
) -> RunResult {
    let b = parse_boundary(boundary)?;
    let ev = lower_bound(&b, t_horizon, c1, c2)?;
    let mut inputs = json!({
        "boundary": boundary,
        "t_horizon": t_horizon,
        "c1": c1,
        "c2": c2,
        "verify": verify,
    });
    let mut outputs = json!({
        "base_probability": ev.base_probability,
        "half_int_fprime_sq": ev.half_int_fprime_sq,
        "int_fpp_sqrt": ev.int_fpp_sqrt,
        "sqrt_t_fprime_t": ev.sqrt_t_fprime_t,
        "lower_bound": ev.lower_bound,
        "quad_tolerance": 1e-10,
    });
    let mut ok = true;
    let mut row = vec![
        num(ev.base_probability),
        num(ev.half_int_fprime_sq),
        num(ev.int_fpp_sqrt),
        num(ev.sqrt_t_fprime_t),
        num(ev.lower_bound),
        String::new(),
        String::new(),
        String::new(),
    ];
    if verify {
        let cfg = sim.config(t_horizon);
        inputs["sim"] = sim.echo(&cfg);
        let check = verify_lower_bound(&b, t_horizon, c1, c2, &cfg)?;
        ok = check.holds;
        outputs["verify"] = json!({
            "p_hat": check.estimate.p_hat,
            "std_err": check.estimate.std_err,
            "margin": check.margin,
            "holds": check.holds,
        });
        row[5] = num(check.estimate.p_hat);
        row[6] = num(check.estimate.std_err);
        row[7] = num(check.margin);
    }
    Ok((
        "bound",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec![
                "base_probability",
                "half_int_fprime_sq",
                "int_fpp_sqrt",
                "sqrt_t_fprime_t",
                "lower_bound",
                "p_hat",
                "std_err",
                "margin",
            ],
            csv_rows: vec![row],
        },
        ok,
    ))
}

fn cmd_rate(boundary: &str, t_grid: &str, sim: &SimArgs) -> RunResult {
    let b = parse_boundary(boundary)?;
    let grid = parse_grid(t_grid).map_err(CliError::Usage)?;
    let mut points = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let mut cfg = sim.config(t);
        // independent draws per horizon so the fit errors stay uncorrelated
        cfg.seed = sim.seed.wrapping_add(i as u64);
        let est = estimate_exit_direct(&b, &cfg)?;
        points.push(RatePoint { t, p_hat: est.p_hat, std_err: est.std_err });
    }
    let fit = fit_rate_exponent(&points)?;
    let inputs = json!({
        "boundary": boundary,
        "t_grid": grid,
        "paths": sim.paths,
        "steps": sim.steps,
        "dt": sim.dt,
        "seed": sim.seed,
        "bridge_correction": !sim.no_bridge,
        "chunk_size": sim.chunk_size,
    });
    let outputs = json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "slope_halfwidth": fit.slope_halfwidth,
        "points": fit.points.iter().map(|p| json!({
            "t": p.t, "p_hat": p.p_hat, "std_err": p.std_err,
        })).collect::<Vec<_>>(),
    });
    let rows = fit
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.t),
                num(p.p_hat),
                num(p.std_err),
                num(fit.slope),
                num(fit.intercept),
                num(fit.slope_halfwidth),
            ]
        })
        .collect();
    Ok((
        "rate",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec!["t", "p_hat", "std_err", "slope", "intercept", "slope_halfwidth"],
            csv_rows: rows,
        },
        true,
    ))
}

fn cmd_novikov(boundary: &str, t_grid: &str, sim: &SimArgs) -> RunResult {
    let b = parse_boundary(boundary)?;
    let grid = parse_grid(t_grid).map_err(CliError::Usage)?;
    let t_max = grid.last().copied().unwrap_or(0.0);
    let cfg = sim.config(t_max);
    let rep = estimate_novikov_limit(&b, &cfg, &grid)?;
    let mut inputs = sim.echo(&cfg);
    inputs["boundary"] = json!(boundary);
    inputs["t_grid"] = json!(grid);
    let outputs = json!({
        "lhs": rep.lhs,
        "lhs_std_err": rep.lhs_std_err,
        "rhs": rep.rhs,
        "rhs_std_err": rep.rhs_std_err,
        "censor_fraction": rep.censor_fraction,
        "censoring_flagged": rep.censoring_flagged,
        "integral_test_warning": rep.integral_test_warning,
        "points": rep.points.iter().map(|p| json!({
            "t": p.t, "p_hat": p.p_hat, "std_err": p.std_err,
            "scaled": p.scaled, "scaled_std_err": p.scaled_std_err,
        })).collect::<Vec<_>>(),
    });
    let rows = rep
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.t),
                num(p.p_hat),
                num(p.std_err),
                num(p.scaled),
                num(p.scaled_std_err),
                num(rep.rhs),
                num(rep.rhs_std_err),
                num(rep.censor_fraction),
            ]
        })
        .collect();
    Ok((
        "novikov",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec![
                "t",
                "p_hat",
                "std_err",
                "scaled",
                "scaled_std_err",
                "rhs",
                "rhs_std_err",
                "censor_fraction",
            ],
            csv_rows: rows,
        },
        true,
    ))
}

fn cmd_slepian(boundary: &str, t0: f64, t_horizon: f64, sim: &SimArgs) -> RunResult {
    let b = parse_boundary(boundary)?;
    let cfg = sim.config(t_horizon);
    let check = slepian_check(&b, t0, t_horizon, &cfg)?;
    let mut inputs = sim.echo(&cfg);
    inputs["boundary"] = json!(boundary);
    inputs["t0"] = json!(t0);
    let outputs = json!({
        "p_full": check.p_full,
        "p_full_std_err": check.p_full_std_err,
        "p_head": check.p_head,
        "p_head_std_err": check.p_head_std_err,
        "p_tail": check.p_tail,
        "p_tail_std_err": check.p_tail_std_err,
        "product": check.product,
        "product_std_err": check.product_std_err,
        "margin": check.margin,
        "holds": check.holds,
    });
    let row = vec![
        num(check.p_full),
        num(check.p_full_std_err),
        num(check.p_head),
        num(check.p_head_std_err),
        num(check.p_tail),
        num(check.p_tail_std_err),
        num(check.product),
        num(check.product_std_err),
        num(check.margin),
        check.holds.to_string(),
    ];
    Ok((
        "slepian",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec![
                "p_full",
                "p_full_std_err",
                "p_head",
                "p_head_std_err",
                "p_tail",
                "p_tail_std_err",
                "product",
                "product_std_err",
                "margin",
                "holds",
            ],
            csv_rows: vec![row],
        },
        check.holds,
    ))
}

fn cmd_bessel(s: f64, sim: &SimArgs) -> RunResult {
    if !(s > 0.0) {
        return Err(CliError::Usage(format!("time s must be positive, got {}", s)));
    }
    let cfg = SimConfig {
        n_paths: sim.paths,
        n_steps: 1,
        t_horizon: s,
        seed: sim.seed,
        bridge_correction: !sim.no_bridge,
        chunk_size: sim.chunk_size,
    };
    let est = bessel_mean(s, &cfg)?;
    let inputs = json!({ "s": s, "paths": sim.paths, "seed": sim.seed });
    let outputs = json!({
        "mean": est.mean,
        "std_err": est.std_err,
        "expected": s.sqrt() * BESSEL3_MEAN,
    });
    Ok((
        "bessel",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec!["mean", "std_err", "expected"],
            csv_rows: vec![vec![num(est.mean), num(est.std_err), num(s.sqrt() * BESSEL3_MEAN)]],
        },
        true,
    ))
}

fn cmd_tau(boundary: &str, t_horizon: f64, sim: &SimArgs) -> RunResult {
    let b = parse_boundary(boundary)?;
    let cfg = sim.config(t_horizon);
    let samples = sample_tau(&b, &cfg)?;
    let n = samples.len() as f64;
    let censored = samples.iter().filter(|s| s.censored).count();
    let mean_f: f64 = samples.iter().map(|s| s.f_at_tau).sum::<f64>() / n;
    let var_f: f64 = samples
        .iter()
        .map(|s| (s.f_at_tau - mean_f) * (s.f_at_tau - mean_f))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let uncensored: Vec<f64> =
        samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect();
    let mean_tau = if uncensored.is_empty() {
        f64::NAN
    } else {
        uncensored.iter().sum::<f64>() / uncensored.len() as f64
    };
    let mut inputs = sim.echo(&cfg);
    inputs["boundary"] = json!(boundary);
    let outputs = json!({
        "censor_fraction": censored as f64 / n,
        "mean_f_at_tau": mean_f,
        "mean_f_std_err": (var_f / n).sqrt(),
        "mean_tau_uncensored": mean_tau,
    });
    let row = vec![
        num(censored as f64 / n),
        num(mean_f),
        num((var_f / n).sqrt()),
        num(mean_tau),
    ];
    Ok((
        "tau",
        inputs,
        CommandOutput {
            outputs,
            csv_header: vec![
                "censor_fraction",
                "mean_f_at_tau",
                "mean_f_std_err",
                "mean_tau_uncensored",
            ],
            csv_rows: vec![row],
        },
        true,
    ))
}
