use super::bfgs::{bfgs_minimize, DEFAULT_GRAD_TOL, DEFAULT_MAX_ITER};
use super::buckets::{extract_buckets, BucketSet, DEFAULT_ALPHAS};
use super::relative_error;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorParams, Scheme, DEFAULT_CFD_H, DEFAULT_HALF_WIDTH};
use crate::noise::{noisy_wrap, NoiseSpec, DEFAULT_LAMBDA};
use crate::objective::Objective;
use crate::streams::{derive_seed, label_id};
use crate::testfns;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_REALIZATIONS: usize = 100;
/// Floor applied to `η` before taking `log10`.
pub const ETA_FLOOR: f64 = 1e-16;

/// One scheme and the budget ladder it is run at.
///
/// `factors` is interpreted per scheme: FFD/CFD ignore it; GSG uses `M = k·n`
/// (`N = kn+1`); CGSG uses `M = k·n` (`N = 2kn`); the mixed schemes use `m = k`
/// (`N = 2kn`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRuns {
    pub scheme: Scheme,
    pub factors: Vec<usize>,
}

impl SchemeRuns {
    pub fn noise_free(scheme: Scheme) -> Self {
        let factors = match scheme {
            Scheme::Ffd | Scheme::Cfd => vec![1],
            Scheme::Gsg => vec![2, 4, 8],
            Scheme::Cgsg => vec![1, 2, 4],
            _ => vec![1, 2, 4],
        };
        Self { scheme, factors }
    }

    pub fn noisy(scheme: Scheme) -> Self {
        let factors = match scheme {
            Scheme::Ffd | Scheme::Cfd => vec![1],
            Scheme::Gsg => vec![4, 8, 12],
            Scheme::Cgsg => vec![2, 4, 6],
            _ => vec![2, 4, 6],
        };
        Self { scheme, factors }
    }
}

/// Evaluation budget `N` as a function of `n`, e.g. `8n+1`.
pub fn rung_label(scheme: Scheme, factor: usize) -> String {
    match scheme {
        Scheme::Ffd => "n+1".into(),
        Scheme::Cfd => "2n".into(),
        Scheme::Gsg => format!("{factor}n+1"),
        Scheme::Cgsg | Scheme::Nmxfd | Scheme::MxfdRaw | Scheme::AvgCfd => format!("{}n", 2 * factor),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sigma: f64,
    /// Step multiplier for FFD/CFD (effective step `σ·h`).
    pub h: f64,
    /// Truncation half-width for the mixed schemes (`h = S/m`).
    #[serde(rename = "S")]
    pub s: f64,
    pub lambda: f64,
    /// Noise realizations `R` averaged per point.
    pub realizations: usize,
    pub seed: u64,
    /// Function names, or `["all"]`.
    pub suite: Vec<String>,
    pub alphas: Vec<f64>,
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Half-width of the seeded uniform perturbation of each start point.
    pub perturb: f64,
    pub runs: Vec<SchemeRuns>,
}

impl BenchConfig {
    pub fn noise_free(sigma: f64, schemes: &[Scheme]) -> Self {
        Self {
            sigma,
            h: DEFAULT_CFD_H,
            s: DEFAULT_HALF_WIDTH,
            lambda: 0.0,
            realizations: 1,
            seed: 0,
            suite: vec!["all".into()],
            alphas: DEFAULT_ALPHAS.to_vec(),
            grad_tol: DEFAULT_GRAD_TOL,
            max_iter: DEFAULT_MAX_ITER,
            perturb: 0.0,
            runs: schemes.iter().map(|&s| SchemeRuns::noise_free(s)).collect(),
        }
    }

    pub fn noisy(sigma: f64, lambda: f64, schemes: &[Scheme]) -> Self {
        Self {
            lambda,
            realizations: DEFAULT_REALIZATIONS,
            runs: schemes.iter().map(|&s| SchemeRuns::noisy(s)).collect(),
            ..Self::noise_free(sigma, &[])
        }
    }

    pub fn default_noisy(sigma: f64, schemes: &[Scheme]) -> Self {
        Self::noisy(sigma, DEFAULT_LAMBDA, schemes)
    }

    fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        pos("sigma", self.sigma)?;
        pos("h", self.h)?;
        pos("S", self.s)?;
        pos("grad_tol", self.grad_tol)?;
        NoiseSpec::new(self.lambda, 0)?;
        if self.realizations == 0 {
            return Err(Error::invalid("realizations", "must be >= 1"));
        }
        if !(self.perturb >= 0.0) {
            return Err(Error::invalid("perturb", "must be >= 0"));
        }
        if self.alphas.is_empty() {
            return Err(Error::invalid("alphas", "must not be empty"));
        }
        for r in &self.runs {
            if r.factors.contains(&0) {
                return Err(Error::invalid("factors", format!("{}: ladder entries must be >= 1", r.scheme)));
            }
        }
        Ok(())
    }

    fn params(&self, scheme: Scheme, factor: usize, n: usize) -> EstimatorParams {
        let mut p = EstimatorParams::new(scheme, self.sigma);
        match scheme {
            Scheme::Ffd | Scheme::Cfd => p.h = Some(self.h),
            Scheme::Gsg | Scheme::Cgsg => p.directions = Some(factor * n),
            Scheme::Nmxfd | Scheme::MxfdRaw | Scheme::AvgCfd => {
                p.m = Some(factor);
                p.s = Some(self.s);
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Median of `log10 η` over the functions that produced a value.
    pub median: Option<f64>,
    pub samples: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub label: String,
    pub factor: usize,
    /// One cell per bucket.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub name: String,
    pub dim: usize,
    pub start: Vec<f64>,
    /// Trajectory index of each bucket point.
    pub bucket_indices: Vec<Option<usize>>,
    /// `‖∇f‖/‖∇f(x⁰)‖` at each bucket point.
    pub bucket_ratios: Vec<Option<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub truncated: bool,
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSample {
    pub function: String,
    pub bucket: usize,
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub label: String,
    pub evals: usize,
    pub eta: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchConfig,
    pub functions: Vec<FunctionSummary>,
    pub rows: Vec<ReportRow>,
    pub samples: Vec<EtaSample>,
}

impl BenchmarkReport {
    pub fn row(&self, scheme: Scheme, factor: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.factor == factor)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().flat_map(|r| &r.cells).map(|c| c.failures).sum()
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    })
}

fn scheme_id(s: Scheme) -> u64 {
    Scheme::ALL.iter().position(|&t| t == s).unwrap_or(0) as u64
}

struct Prepared {
    f: Box<dyn Objective>,
    summary: FunctionSummary,
    buckets: Option<BucketSet>,
}

fn prepare(f: Box<dyn Objective>, cfg: &BenchConfig) -> Result<Prepared> {
    let start = testfns::perturbed_start(f.as_ref(), cfg.seed, cfg.perturb);
    let traj = bfgs_minimize(f.as_ref(), &start, cfg.grad_tol, cfg.max_iter)?;
    let mut summary = FunctionSummary {
        name: f.name().to_string(),
        dim: f.dim(),
        start,
        bucket_indices: vec![None; cfg.alphas.len()],
        bucket_ratios: vec![None; cfg.alphas.len()],
        iterations: traj.points.len() - 1,
        converged: traj.converged,
        truncated: traj.truncated,
        excluded: None,
    };
    let buckets = match extract_buckets(&traj.points, f.as_ref(), &cfg.alphas) {
        Ok(b) => {
            summary.bucket_indices = b.points.iter().map(|p| p.as_ref().map(|p| p.index)).collect();
            summary.bucket_ratios = b.points.iter().map(|p| p.as_ref().map(|p| p.ratio)).collect();
            Some(b)
        }
        Err(e @ Error::ZeroInitialGradient(_)) => {
            summary.excluded = Some(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    Ok(Prepared { f, summary, buckets })
}

/// Mean relative error over `cfg.realizations` independent noise draws.
fn point_eta(
    f: &dyn Objective,
    x: &[f64],
    est: &Estimator,
    cfg: &BenchConfig,
    coords: [u64; 4],
) -> Result<f64> {
    let truth = f
        .gradient(x)
        .ok_or_else(|| Error::MissingGradient(f.name().to_string()))?;
    let mut total = 0.0;
    for trial in 0..cfg.realizations as u64 {
        let base = [coords[0], coords[1], coords[2], coords[3], trial];
        let dir_seed = derive_seed(cfg.seed, &[base[0], base[1], base[2], base[3], base[4], 0]);
        let noise_seed = derive_seed(cfg.seed, &[base[0], base[1], base[2], base[3], base[4], 1]);
        let mut eval = noisy_wrap(f, NoiseSpec::new(cfg.lambda, noise_seed)?)?;
        let g = est.estimate_seeded(&mut eval, x, dir_seed)?;
        total += relative_error(&g.vector, &truth)?;
    }
    Ok(total / cfg.realizations as f64)
}

fn run(cfg: &BenchConfig, jobs: Option<usize>) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            b = b.num_threads(j.max(1));
        }
        b.build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?
    };
    pool.install(|| {
        let fns = testfns::suite(&cfg.suite)?;
        let prepared = fns
            .into_par_iter()
            .map(|f| prepare(f, cfg))
            .collect::<Result<Vec<_>>>()?;

        struct Task<'p> {
            p: &'p Prepared,
            bucket: usize,
            run: usize,
            factor: usize,
        }
        let mut tasks = Vec::new();
        for p in &prepared {
            let Some(b) = &p.buckets else { continue };
            for (bucket, point) in b.points.iter().enumerate() {
                if point.is_none() {
                    continue;
                }
                for (run, r) in cfg.runs.iter().enumerate() {
                    for &factor in &r.factors {
                        tasks.push(Task { p, bucket, run, factor });
                    }
                }
            }
        }

        let samples = tasks
            .par_iter()
            .map(|t| {
                let f = t.p.f.as_ref();
                let scheme = cfg.runs[t.run].scheme;
                let x = t.p.buckets.as_ref().and_then(|b| b.points[t.bucket].as_ref()).map(|b| b.point.as_slice()).expect("bucket present");
                let coords = [label_id(f.name()), t.bucket as u64, scheme_id(scheme), t.factor as u64];
                let outcome = cfg
                    .params(scheme, t.factor, f.dim())
                    .resolve()
                    .and_then(Estimator::new)
                    .and_then(|est| Ok((est.expected_evals(f.dim()), point_eta(f, x, &est, cfg, coords)?)));
                let (evals, eta, error) = match outcome {
                    Ok((evals, eta)) => (evals, Some(eta), None),
                    Err(e) => (scheme.evaluations(f.dim(), t.factor, t.factor * f.dim()), None, Some(e.to_string())),
                };
                EtaSample {
                    function: f.name().to_string(),
                    bucket: t.bucket,
                    scheme,
                    label: rung_label(scheme, t.factor),
                    evals,
                    eta,
                    error,
                }
            })
            .collect::<Vec<_>>();

        let mut rows = Vec::new();
        for r in &cfg.runs {
            for &factor in &r.factors {
                let label = rung_label(r.scheme, factor);
                let cells = (0..cfg.alphas.len())
                    .map(|bucket| {
                        let hits: Vec<&EtaSample> = samples
                            .iter()
                            .filter(|s| s.scheme == r.scheme && s.label == label && s.bucket == bucket)
                            .collect();
                        let mut logs: Vec<f64> = hits
                            .iter()
                            .filter_map(|s| s.eta)
                            .map(|e| e.max(ETA_FLOOR).log10())
                            .collect();
                        let failures = hits.len() - logs.len();
                        Cell {
                            samples: logs.len(),
                            median: median(&mut logs),
                            failures,
                        }
                    })
                    .collect();
                rows.push(ReportRow {
                    scheme: r.scheme,
                    label,
                    factor,
                    cells,
                });
            }
        }

        Ok(BenchmarkReport {
            config: cfg.clone(),
            functions: prepared.into_iter().map(|p| p.summary).collect(),
            rows,
            samples,
        })
    })
}

/// Noise-free benchmark: `λ` and `R` in the config are replaced by 0 and 1.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchmarkReport> {
    run_benchmark_jobs(cfg, None)
}

pub fn run_benchmark_jobs(cfg: &BenchConfig, jobs: Option<usize>) -> Result<BenchmarkReport> {
    let cfg = BenchConfig {
        lambda: 0.0,
        realizations: 1,
        ..cfg.clone()
    };
    run(&cfg, jobs)
}

/// Noisy benchmark: each point's `η` is the mean over `R` independent noise streams.
pub fn run_noisy_benchmark(cfg: &BenchConfig) -> Result<BenchmarkReport> {
    run_noisy_benchmark_jobs(cfg, None)
}

pub fn run_noisy_benchmark_jobs(cfg: &BenchConfig, jobs: Option<usize>) -> Result<BenchmarkReport> {
    run(cfg, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(rung_label(Scheme::Gsg, 8), "8n+1");
        assert_eq!(rung_label(Scheme::Cgsg, 2), "4n");
        assert_eq!(rung_label(Scheme::Nmxfd, 6), "12n");
        assert_eq!(rung_label(Scheme::Ffd, 1), "n+1");
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut []), None);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }

    #[test]
    fn quadratic_nmxfd_cells_hit_the_floor() {
        // BFGS lands on machine-zero gradients of a quadratic after a few steps; there the
        // difference quotient is pure roundoff, so only resolvable buckets are checked.
        for sigma in [1e-1, 1e-3, 1e-5] {
            let mut cfg = BenchConfig::noise_free(sigma, &[Scheme::Nmxfd]);
            cfg.suite = vec!["sphere".into()];
            let r = run_benchmark(&cfg).unwrap();
            let ratios = &r.functions[0].bucket_ratios;
            let mut checked = 0;
            for row in &r.rows {
                for (b, c) in row.cells.iter().enumerate() {
                    let ratio = ratios[b].unwrap();
                    if ratio >= 1e-12 {
                        assert!(c.median.unwrap() <= -10.0, "sigma={sigma} {row:?}");
                        checked += 1;
                    } else {
                        assert!(ratio < 1e-12);
                    }
                }
            }
            assert!(checked >= 3);
        }
    }

    #[test]
    fn evaluation_counts_recorded() {
        let mut cfg = BenchConfig::noise_free(1e-3, &[Scheme::Gsg, Scheme::Cgsg, Scheme::Nmxfd]);
        cfg.suite = vec!["wood".into()];
        let r = run_benchmark(&cfg).unwrap();
        let by = |s: Scheme, l: &str| r.samples.iter().find(|x| x.scheme == s && x.label == l).unwrap().evals;
        assert_eq!(by(Scheme::Gsg, "8n+1"), 33);
        assert_eq!(by(Scheme::Cgsg, "8n"), 32);
        assert_eq!(by(Scheme::Nmxfd, "8n"), 32);
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = BenchConfig::noise_free(1e-3, &[Scheme::Cfd]);
        cfg.sigma = 0.0;
        assert!(run_benchmark(&cfg).is_err());
        let mut cfg = BenchConfig::noisy(1e-3, 1e-3, &[Scheme::Cfd]);
        cfg.realizations = 0;
        assert!(run_noisy_benchmark(&cfg).is_err());
        let mut cfg = BenchConfig::noise_free(1e-3, &[Scheme::Cfd]);
        cfg.suite = vec!["nope".into()];
        assert!(matches!(run_benchmark(&cfg), Err(Error::UnknownObjective { .. })));
    }
}
