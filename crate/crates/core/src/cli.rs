//! Command-line front end. `main` forwards to [`run`].

use crate::coefficients::mixing_coefficients;
use crate::error::Error;
use crate::estimators::{Estimator, EstimatorConfig, EstimatorParams, Scheme};
use crate::experiment::{
    self, bfgs_minimize, emit_table, extract_buckets, relative_error, BenchConfig, BucketSet,
    Format, SchemeRuns,
};
use crate::noise::{noisy_wrap, NoiseSpec};
use crate::objective::{norm2, Exact, Objective};
use crate::oracles::{self, BoundReport, SmoothingAccuracy};
use crate::streams::{derive_seed, label_id};
use crate::testfns;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "gradmix",
    version,
    about = "Gradient estimation by normalized mixed central differences",
    long_about = "Gradient estimators (FFD, CFD, GSG, CGSG, NMXFD and ablations), error bounds, \
                  noise-variance experiments and a bucketed benchmark harness.\n\n\
                  Symbols: σ smoothing scale, h quadrature step, m number of mixed differences, \
                  S = m·h truncation half-width, M sampled directions, λ noise standard deviation, \
                  α bucket threshold on ‖∇f(x)‖/‖∇f(x⁰)‖."
)]
pub struct Cli {
    /// Flat `key = value` file; keys are flag names. Command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Trapezoidal mixing coefficients a′_j, their sum C and normalized weights a_j.
    Coeffs(CoeffsArgs),
    /// Estimate a gradient at one point.
    Estimate(EstimateArgs),
    /// Compare observed errors with the theoretical bounds at one point.
    Bounds(BoundsArgs),
    /// BFGS trajectory and gradient-ratio buckets for one function.
    Buckets(BucketsArgs),
    /// Median log10 relative error per scheme, budget N and bucket over a suite.
    Bench(BenchArgs),
    /// Empirical noise variance of an estimator against its closed form.
    Variance(VarianceArgs),
    /// Built-in test functions.
    #[command(subcommand)]
    Fns(FnsCommand),
}

#[derive(Subcommand, Debug)]
pub enum FnsCommand {
    /// List names, dimensions, known constants L and H, and start points.
    List,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Markdown => Format::Markdown,
        }
    }
}

/// Comma-separated list of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .enumerate()
        .map(|(k, t)| {
            let t = t.trim();
            if t.is_empty() {
                return Err(format!("empty coordinate at position {k}"));
            }
            let v: f64 = t.parse().map_err(|_| format!("cannot parse `{t}` as a real"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("coordinate `{t}` is not finite"))
            }
        })
        .collect::<Result<Vec<f64>, String>>()
        .map(Point)
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    /// Number of mixed central differences m.
    #[arg(long)]
    pub m: usize,
    /// Quadrature step h (S = m·h).
    #[arg(long, required_unless_present = "s")]
    pub h: Option<f64>,
    /// Truncation half-width S; sets h = S/m.
    #[arg(long = "S", conflicts_with = "h")]
    pub s: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Args, Debug, Clone)]
pub struct EstimatorFlags {
    /// Smoothing scale σ.
    #[arg(long)]
    pub sigma: f64,
    /// Quadrature step h; CFD/FFD step is σ·h.
    #[arg(long)]
    pub h: Option<f64>,
    /// Number of mixed central differences m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Truncation half-width S = m·h.
    #[arg(long = "S")]
    pub s: Option<f64>,
    /// Sampled directions M for GSG/CGSG.
    #[arg(long = "M")]
    pub directions: Option<usize>,
    /// Base seed; falls back to GRADMIX_SEED.
    #[arg(long, env = "GRADMIX_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Objective name (see `fns list`).
    #[arg(long = "fn")]
    pub function: String,
    /// Point x as comma-separated reals.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub x: Point,
    /// FFD, CFD, GSG, CGSG, NMXFD, MXFD_RAW or AVG_CFD.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Scheme,
    #[command(flatten)]
    pub est: EstimatorFlags,
    /// Noise standard deviation λ (0 = exact values).
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Noise stream seed; derived from --seed when absent.
    #[arg(long)]
    pub noise_seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub x: Point,
    /// Smoothing scale σ.
    #[arg(long)]
    pub sigma: f64,
    /// Number of mixed central differences m.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Quadrature step h; defaults to S/m with S = 3.
    #[arg(long)]
    pub h: Option<f64>,
    /// Noise standard deviation λ for the variance formulas.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Seed of the local constant estimates.
    #[arg(long, env = "GRADMIX_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BucketsArgs {
    #[arg(long = "fn")]
    pub function: String,
    /// Dimension for variable-size families.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Seed of the start-point perturbation.
    #[arg(long, env = "GRADMIX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Half-width of the uniform start perturbation (0 = documented x⁰).
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    /// BFGS stops when ‖∇f‖ ≤ grad_tol·(1 + ‖∇f(x⁰)‖).
    #[arg(long, default_value_t = experiment::bfgs::DEFAULT_GRAD_TOL)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = experiment::bfgs::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Bucket thresholds α, comma-separated.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub alphas: Option<Point>,
    /// Include the full trajectory in the output.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Smoothing scale σ.
    #[arg(long)]
    pub sigma: f64,
    /// Noise standard deviation λ; switches to the noisy protocol and its N ladders.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Noise realizations R averaged per point.
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "FFD,CFD,GSG,CGSG,NMXFD")]
    pub schemes: Vec<Scheme>,
    /// Comma-separated function names, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub suite: Vec<String>,
    /// Truncation half-width S for the mixed schemes (h = S/m).
    #[arg(long = "S", default_value_t = crate::estimators::DEFAULT_HALF_WIDTH)]
    pub s: f64,
    /// Step multiplier h for FFD/CFD (step σ·h).
    #[arg(long, default_value_t = crate::estimators::DEFAULT_CFD_H)]
    pub h: f64,
    /// Base seed for directions, noise and start perturbation.
    #[arg(long, env = "GRADMIX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Half-width of the seeded start perturbation.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Exit with status 1 when any cell records a failure.
    #[arg(long)]
    pub strict: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct VarianceArgs {
    /// FFD, CFD, GSG, CGSG, NMXFD, MXFD_RAW or AVG_CFD.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Scheme,
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub x: Point,
    /// Smoothing scale σ.
    #[arg(long)]
    pub sigma: f64,
    /// Quadrature step h.
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    /// Number of mixed central differences m.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Noise standard deviation λ.
    #[arg(long, default_value_t = crate::noise::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Independent noise trials (at least 10000).
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Seed of the noise streams.
    #[arg(long, env = "GRADMIX_SEED", default_value_t = 0)]
    pub seed: u64,
}

/// Failure carrying its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn objective_for(name: &str, x: &[f64]) -> Result<Box<dyn Objective>, Failure> {
    let entry = testfns::catalog().into_iter().find(|e| e.name == name);
    let dim = match entry {
        Some(e) if e.variable_dim => Some(x.len()),
        _ => None,
    };
    let f = testfns::lookup(name, dim)?;
    if f.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        }
        .into());
    }
    Ok(f)
}

#[derive(Serialize)]
struct CoeffsOut {
    m: usize,
    h: f64,
    #[serde(rename = "S")]
    s: f64,
    raw: Vec<f64>,
    total: f64,
    normalized: Vec<f64>,
    variance_factor: f64,
}

fn cmd_coeffs(a: &CoeffsArgs) -> Result<String, Failure> {
    let h = match (a.h, a.s) {
        (Some(h), _) => h,
        (None, Some(s)) if a.m > 0 => s / a.m as f64,
        _ => return Err(fail(2, "either --h or --S is required")),
    };
    let t = mixing_coefficients(a.m, h)?;
    Ok(match a.format {
        OutputFormat::Json => to_json(&CoeffsOut {
            m: t.m,
            h: t.h,
            s: t.half_width(),
            variance_factor: t.variance_factor(),
            raw: t.raw.clone(),
            total: t.total,
            normalized: t.normalized.clone(),
        }),
        OutputFormat::Csv => {
            let mut s = format!("# m={}\n# h={}\n# total={}\nj,raw,normalized\n", t.m, t.h, t.total);
            for (j, (r, n)) in t.raw.iter().zip(&t.normalized).enumerate() {
                s.push_str(&format!("{},{},{}\n", j + 1, r, n));
            }
            s
        }
        OutputFormat::Markdown => {
            let mut s = format!("C = {}\n\n| j | a′_j | a_j |\n|---:|---:|---:|\n", t.total);
            for (j, (r, n)) in t.raw.iter().zip(&t.normalized).enumerate() {
                s.push_str(&format!("| {} | {:.6} | {:.6} |\n", j + 1, r, n));
            }
            s
        }
    })
}

fn params_from(flags: &EstimatorFlags, scheme: Scheme) -> EstimatorParams {
    EstimatorParams {
        scheme,
        sigma: flags.sigma,
        h: flags.h,
        m: flags.m,
        s: flags.s,
        directions: flags.directions,
        seed: flags.seed,
    }
}

#[derive(Serialize)]
struct EstimateOut {
    function: String,
    x: Vec<f64>,
    config: EstimatorConfig,
    lambda: f64,
    noise_seed: Option<u64>,
    estimate: Vec<f64>,
    evals: usize,
    true_gradient: Option<Vec<f64>>,
    eta: Option<f64>,
}

fn cmd_estimate(a: &EstimateArgs) -> Result<String, Failure> {
    let f = objective_for(&a.function, &a.x.0)?;
    let config = params_from(&a.est, a.scheme).resolve()?;
    let est = Estimator::new(config)?;
    let spec = NoiseSpec::new(a.lambda, 0)?;
    let (g, noise_seed) = if spec.lambda > 0.0 {
        let seed = a
            .noise_seed
            .unwrap_or_else(|| derive_seed(a.est.seed, &[label_id("noise")]));
        let mut w = noisy_wrap(f.as_ref(), NoiseSpec::new(spec.lambda, seed)?)?;
        (est.estimate(&mut w, &a.x.0)?, Some(seed))
    } else {
        (est.estimate(&mut Exact(f.as_ref()), &a.x.0)?, None)
    };
    let truth = f.gradient(&a.x.0);
    let eta = truth.as_ref().and_then(|t| relative_error(&g.vector, t).ok());
    Ok(to_json(&EstimateOut {
        function: f.name().to_string(),
        x: a.x.0.clone(),
        config,
        lambda: spec.lambda,
        noise_seed,
        estimate: g.vector,
        evals: g.evals,
        true_gradient: truth,
        eta,
    }))
}

#[derive(Serialize)]
struct NamedBound {
    name: String,
    #[serde(flatten)]
    report: BoundReport,
}

#[derive(Serialize)]
struct Constant {
    value: f64,
    source: &'static str,
}

#[derive(Serialize)]
struct VarianceOut {
    cfd: f64,
    nmxfd: f64,
}

#[derive(Serialize)]
struct BoundsOut {
    function: String,
    x: Vec<f64>,
    sigma: f64,
    m: usize,
    h: f64,
    #[serde(rename = "S")]
    s: f64,
    lambda: f64,
    #[serde(rename = "H")]
    big_h: Constant,
    #[serde(rename = "L")]
    l: Option<Constant>,
    bias_bound_nmxfd: f64,
    variance: VarianceOut,
    reports: Vec<NamedBound>,
}

fn cmd_bounds(a: &BoundsArgs) -> Result<String, Failure> {
    let f = objective_for(&a.function, &a.x.0)?;
    let n = a.x.0.len();
    let h = a.h.unwrap_or(crate::estimators::DEFAULT_HALF_WIDTH / a.m.max(1) as f64);
    let mut p = EstimatorParams::new(Scheme::Nmxfd, a.sigma);
    p.m = Some(a.m);
    p.h = Some(h);
    let config = p.resolve()?;
    let s = config.s;
    let truth = f
        .gradient(&a.x.0)
        .ok_or_else(|| Error::MissingGradient(f.name().to_string()))?;

    let big_h = match f.lipschitz_hess() {
        Some(v) => Constant {
            value: v,
            source: "declared",
        },
        None => Constant {
            value: oracles::estimate_lipschitz_hess(f.as_ref(), &a.x.0, a.sigma * s, 64, a.seed),
            source: "estimated",
        },
    };

    let mut reports = Vec::new();
    let g = Estimator::new(config)?.estimate(&mut Exact(f.as_ref()), &a.x.0)?;
    let err: Vec<f64> = g.vector.iter().zip(&truth).map(|(u, v)| u - v).collect();
    reports.push(NamedBound {
        name: "nmxfd_error".into(),
        report: BoundReport::new(oracles::nmxfd_error_bound(big_h.value, a.sigma, s, n), norm2(&err)),
    });
    for j in 1..=a.m {
        let c = crate::estimators::cfd(&mut Exact(f.as_ref()), &a.x.0, a.sigma, j as f64 * h)?;
        let worst = c
            .vector
            .iter()
            .zip(&truth)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        reports.push(NamedBound {
            name: format!("cfd_error_j{j}"),
            report: BoundReport::new(oracles::cfd_error_bound(big_h.value, a.sigma, h, j), worst),
        });
    }

    let mut l = None;
    if n <= oracles::MAX_TENSOR_DIM {
        let lc = match f.lipschitz_grad() {
            Some(v) => Constant {
                value: v,
                source: "declared",
            },
            None => Constant {
                value: oracles::estimate_lipschitz_grad(
                    f.as_ref(),
                    &a.x.0,
                    oracles::TRUNCATION * a.sigma,
                    64,
                    a.seed,
                ),
                source: "estimated",
            },
        };
        let tol = 1e-9;
        let smoothed = oracles::smoothed_gradient_oracle(f.as_ref(), &a.x.0, a.sigma, SmoothingAccuracy::Tensor { tol })?;
        let filtered = (0..n)
            .map(|i| oracles::filtered_derivative_oracle(f.as_ref(), &a.x.0, i, a.sigma, oracles::TRUNCATION, tol))
            .collect::<Result<Vec<_>, _>>()?;
        let gap: Vec<f64> = smoothed.value.iter().zip(&filtered).map(|(u, v)| u - v).collect();
        reports.push(NamedBound {
            name: "smoothing_gap".into(),
            report: BoundReport::new(oracles::smoothing_gap_bound(lc.value, a.sigma, n), norm2(&gap)),
        });
        l = Some(lc);
    }

    NoiseSpec::new(a.lambda, 0)?;
    Ok(to_json(&BoundsOut {
        function: f.name().to_string(),
        x: a.x.0.clone(),
        sigma: a.sigma,
        m: a.m,
        h,
        s,
        lambda: a.lambda,
        bias_bound_nmxfd: oracles::bias_bound_nmxfd(big_h.value, a.sigma, a.m, h, n),
        variance: VarianceOut {
            cfd: oracles::variance_cfd(n, a.lambda, a.sigma, h),
            nmxfd: oracles::variance_nmxfd(n, a.lambda, a.sigma, h, a.m)?,
        },
        big_h,
        l,
        reports,
    }))
}

#[derive(Serialize)]
struct BucketsOut {
    function: String,
    dim: usize,
    start: Vec<f64>,
    seed: u64,
    perturb: f64,
    grad_tol: f64,
    max_iter: usize,
    iterations: usize,
    converged: bool,
    truncated: bool,
    buckets: BucketSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<Vec<Vec<f64>>>,
}

fn cmd_buckets(a: &BucketsArgs) -> Result<String, Failure> {
    let f = testfns::lookup(&a.function, a.dim)?;
    let start = testfns::perturbed_start(f.as_ref(), a.seed, a.perturb);
    let t = bfgs_minimize(f.as_ref(), &start, a.grad_tol, a.max_iter)?;
    let alphas = a.alphas.clone().map(|p| p.0).unwrap_or_else(|| experiment::DEFAULT_ALPHAS.to_vec());
    let buckets = extract_buckets(&t.points, f.as_ref(), &alphas)?;
    Ok(to_json(&BucketsOut {
        function: f.name().to_string(),
        dim: f.dim(),
        start,
        seed: a.seed,
        perturb: a.perturb,
        grad_tol: a.grad_tol,
        max_iter: a.max_iter,
        iterations: t.points.len() - 1,
        converged: t.converged,
        truncated: t.truncated,
        buckets,
        trajectory: a.trajectory.then(|| t.points.clone()),
    }))
}

fn cmd_bench(a: &BenchArgs) -> Result<(String, bool), Failure> {
    let mut cfg = match a.lambda {
        Some(lambda) => BenchConfig::noisy(a.sigma, lambda, &a.schemes),
        None => BenchConfig::noise_free(a.sigma, &a.schemes),
    };
    if let Some(r) = a.realizations {
        cfg.realizations = r;
    }
    cfg.s = a.s;
    cfg.h = a.h;
    cfg.seed = a.seed;
    cfg.perturb = a.perturb;
    cfg.suite = a.suite.clone();
    cfg.runs = a
        .schemes
        .iter()
        .map(|&s| if a.lambda.is_some() { SchemeRuns::noisy(s) } else { SchemeRuns::noise_free(s) })
        .collect();
    let report = if a.lambda.is_some() {
        experiment::run_noisy_benchmark_jobs(&cfg, a.jobs)?
    } else {
        experiment::run_benchmark_jobs(&cfg, a.jobs)?
    };
    Ok((emit_table(&report, a.format.into()), report.failures() > 0))
}

fn cmd_variance(a: &VarianceArgs) -> Result<String, Failure> {
    let f = objective_for(&a.function, &a.x.0)?;
    let r = experiment::variance_experiment(
        a.scheme,
        f.as_ref(),
        &a.x.0,
        a.sigma,
        a.h,
        a.m,
        a.lambda,
        a.trials,
        a.seed,
    )?;
    Ok(to_json(&r))
}

#[derive(Serialize)]
struct FnInfo {
    name: &'static str,
    dim: usize,
    variable_dim: bool,
    in_suite: bool,
    #[serde(rename = "L")]
    l: Option<f64>,
    #[serde(rename = "H")]
    h: Option<f64>,
    start: Vec<f64>,
    domain: [f64; 2],
}

fn cmd_fns() -> Result<String, Failure> {
    let list = testfns::catalog()
        .iter()
        .map(|e| {
            let f = e.build(None)?;
            let (lo, hi) = f.domain();
            Ok(FnInfo {
                name: e.name,
                dim: f.dim(),
                variable_dim: e.variable_dim,
                in_suite: e.in_suite,
                l: f.lipschitz_grad(),
                h: f.lipschitz_hess(),
                start: f.start(),
                domain: [lo, hi],
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(to_json(&list))
}

fn command() -> clap::Command {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    cmd
}

fn read_config(path: &std::path::Path) -> Result<Vec<(String, String)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(1, format!("cannot read config `{}`: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            return Err(fail(2, format!("{}:{}: expected `key = value`", path.display(), lineno + 1)));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        let value = v.trim().trim_matches('"').to_string();
        out.push((key, value));
    }
    Ok(out)
}

/// Inserts config entries as flags right after the subcommand token, so that the user's
/// own flags, parsed later, override them.
fn overlay(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut config = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = args[i].strip_prefix("--config=") {
            config = Some(p.to_string());
        }
        i += 1;
    }
    let Some(path) = config else { return Ok(args) };
    let entries = read_config(std::path::Path::new(&path))?;

    let cmd = command();
    let subs: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let mut pos = None;
    let mut skip_next = false;
    for (k, a) in args.iter().enumerate().skip(1) {
        if skip_next {
            skip_next = false;
            continue;
        }
        if a == "--config" {
            skip_next = true;
            continue;
        }
        if subs.contains(a) {
            pos = Some(k);
            break;
        }
    }
    let Some(pos) = pos else { return Ok(args) };
    let sub = cmd.find_subcommand(&args[pos]).expect("known subcommand");

    let mut inserted = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        match sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) {
            Some(arg) => {
                if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
                    match value.to_ascii_lowercase().as_str() {
                        "true" | "1" | "yes" | "" => inserted.push(format!("--{key}")),
                        "false" | "0" | "no" => {}
                        other => return Err(fail(2, format!("config key `{key}`: expected a boolean, got `{other}`"))),
                    }
                } else {
                    inserted.push(format!("--{key}={value}"));
                }
            }
            None => {
                let known = cmd
                    .get_subcommands()
                    .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key.as_str())));
                if !known {
                    return Err(fail(2, format!("unknown config key `{key}`")));
                }
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(inserted);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Parses `args` (including the program name), runs the subcommand and returns the exit
/// status: 0 on success, 1 on domain errors, 2 on usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match overlay(args) {
        Ok(a) => a,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            return f.code;
        }
    };
    let matches = match command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return 2;
        }
    };

    let result = match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a).map(|s| (s, None, false)),
        Command::Estimate(a) => cmd_estimate(a).map(|s| (s, None, false)),
        Command::Bounds(a) => cmd_bounds(a).map(|s| (s, None, false)),
        Command::Buckets(a) => cmd_buckets(a).map(|s| (s, None, false)),
        Command::Bench(a) => cmd_bench(a).map(|(s, failed)| (s, a.out.clone(), failed && a.strict)),
        Command::Variance(a) => cmd_variance(a).map(|s| (s, None, false)),
        Command::Fns(FnsCommand::List) => cmd_fns().map(|s| (s, None, false)),
    };
    match result {
        Ok((text, path, strict_failure)) => {
            if let Some(path) = path {
                if let Err(e) = std::fs::write(&path, &text) {
                    let _ = writeln!(err, "error: cannot write `{}`: {e}", path.display());
                    return 1;
                }
            } else if out.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            if strict_failure {
                let _ = writeln!(err, "error: benchmark recorded failed cells (--strict)");
                return 1;
            }
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
