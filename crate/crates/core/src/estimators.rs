//! Gradient estimators.
//!
//! Every estimator consumes the objective through [`Evaluator`], counts its calls and
//! returns the count with the estimate. Function values are never cached across
//! calls, so noisy objectives draw fresh noise for each evaluation.

use crate::coefficients::{mixing_coefficients, CoefficientTable};
use crate::error::{Error, Result};
use crate::objective::Evaluator;
use crate::oracles::quadrature::neumaier_sum;
use crate::streams;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Default truncation half-width `S` for the mixed schemes.
pub const DEFAULT_HALF_WIDTH: f64 = 3.0;
/// Default quadrature step `h` for FFD and CFD (step `σ·h = σ`).
pub const DEFAULT_CFD_H: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "FFD")]
    Ffd,
    #[serde(rename = "CFD")]
    Cfd,
    #[serde(rename = "GSG")]
    Gsg,
    #[serde(rename = "CGSG")]
    Cgsg,
    #[serde(rename = "MXFD_RAW")]
    MxfdRaw,
    #[serde(rename = "NMXFD")]
    Nmxfd,
    #[serde(rename = "AVG_CFD")]
    AvgCfd,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Ffd,
        Scheme::Cfd,
        Scheme::Gsg,
        Scheme::Cgsg,
        Scheme::MxfdRaw,
        Scheme::Nmxfd,
        Scheme::AvgCfd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ffd => "FFD",
            Scheme::Cfd => "CFD",
            Scheme::Gsg => "GSG",
            Scheme::Cgsg => "CGSG",
            Scheme::MxfdRaw => "MXFD_RAW",
            Scheme::Nmxfd => "NMXFD",
            Scheme::AvgCfd => "AVG_CFD",
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, Scheme::MxfdRaw | Scheme::Nmxfd | Scheme::AvgCfd)
    }

    pub fn is_sampled(self) -> bool {
        matches!(self, Scheme::Gsg | Scheme::Cgsg)
    }

    /// Number of objective calls for one estimate in dimension `n`.
    pub fn evaluations(self, n: usize, m: usize, directions: usize) -> usize {
        match self {
            Scheme::Ffd => n + 1,
            Scheme::Cfd => 2 * n,
            Scheme::Gsg => directions + 1,
            Scheme::Cgsg => 2 * directions,
            Scheme::MxfdRaw | Scheme::Nmxfd | Scheme::AvgCfd => 2 * m * n,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Ok(match key.as_str() {
            "FFD" => Scheme::Ffd,
            "CFD" => Scheme::Cfd,
            "GSG" => Scheme::Gsg,
            "CGSG" => Scheme::Cgsg,
            "MXFD_RAW" | "MXFD" | "MXFD_UNNORMALIZED" => Scheme::MxfdRaw,
            "NMXFD" => Scheme::Nmxfd,
            "AVG_CFD" | "RAW_AVERAGE_CFD" => Scheme::AvgCfd,
            _ => return Err(Error::UnknownScheme(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub vector: Vec<f64>,
    /// Objective calls consumed, `N`.
    pub evals: usize,
}

/// Counts calls and rejects non-finite values.
struct Counted<'e> {
    inner: &'e mut dyn Evaluator,
    calls: usize,
}

impl<'e> Counted<'e> {
    fn new(inner: &'e mut dyn Evaluator) -> Self {
        Self { inner, calls: 0 }
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.calls += 1;
        let v = self.inner.evaluate(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                objective: self.inner.name().to_string(),
                point: x.to_vec(),
                value: v,
            })
        }
    }

    /// `f(x + t e_i)`
    fn eval_axis(&mut self, x: &[f64], i: usize, t: f64) -> Result<f64> {
        let mut y = x.to_vec();
        y[i] += t;
        self.eval(&y)
    }

    fn finish(self, vector: Vec<f64>) -> GradientEstimate {
        GradientEstimate {
            vector,
            evals: self.calls,
        }
    }
}

fn check_point(f: &dyn Evaluator, x: &[f64]) -> Result<()> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("x", "all coordinates must be finite"));
    }
    Ok(())
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Forward differences with step `step`. `f(x)` is evaluated once.
pub fn ffd(f: &mut dyn Evaluator, x: &[f64], step: f64) -> Result<GradientEstimate> {
    check_point(f, x)?;
    let step = positive("step", step)?;
    let mut c = Counted::new(f);
    let base = c.eval(x)?;
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        g.push((c.eval_axis(x, i, step)? - base) / step);
    }
    Ok(c.finish(g))
}

/// Central differences with step `σ·h`.
pub fn cfd(f: &mut dyn Evaluator, x: &[f64], sigma: f64, h: f64) -> Result<GradientEstimate> {
    check_point(f, x)?;
    let t = positive("sigma*h", positive("sigma", sigma)? * positive("h", h)?)?;
    let mut c = Counted::new(f);
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let plus = c.eval_axis(x, i, t)?;
        let minus = c.eval_axis(x, i, -t)?;
        g.push((plus - minus) / (2.0 * t));
    }
    Ok(c.finish(g))
}

fn gaussian_direction(seed: u64, index: usize, n: usize) -> Vec<f64> {
    let mut rng = streams::substream(seed, index as u64);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn sampled(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    directions: usize,
    seed: u64,
    central: bool,
) -> Result<GradientEstimate> {
    check_point(f, x)?;
    let sigma = positive("sigma", sigma)?;
    if directions == 0 {
        return Err(Error::invalid("M", "must be >= 1"));
    }
    let n = x.len();
    let mut c = Counted::new(f);
    let base = if central { 0.0 } else { c.eval(x)? };
    let mut acc = vec![0.0; n];
    for k in 0..directions {
        let s = gaussian_direction(seed, k, n);
        let forward: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi + sigma * si).collect();
        let diff = if central {
            let backward: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi - sigma * si).collect();
            (c.eval(&forward)? - c.eval(&backward)?) / (2.0 * sigma)
        } else {
            (c.eval(&forward)? - base) / sigma
        };
        for (a, si) in acc.iter_mut().zip(&s) {
            *a += diff * si;
        }
    }
    let scale = 1.0 / directions as f64;
    Ok(c.finish(acc.into_iter().map(|a| a * scale).collect()))
}

/// Gaussian smoothed gradient, `(1/M) Σ (f(x + σs_k) − f(x)) s_k / σ`.
///
/// Direction `k` is drawn from substream `k` of `seed`, so the first `M` directions
/// do not depend on `M`.
pub fn gsg(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    directions: usize,
    seed: u64,
) -> Result<GradientEstimate> {
    sampled(f, x, sigma, directions, seed, false)
}

/// Central Gaussian smoothed gradient, `(1/M) Σ (f(x + σs_k) − f(x − σs_k)) s_k / (2σ)`.
pub fn cgsg(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    directions: usize,
    seed: u64,
) -> Result<GradientEstimate> {
    sampled(f, x, sigma, directions, seed, true)
}

/// `Σ_j w_j · δ_j` where `δ_j` is the central difference at step `σ·j·h`.
fn weighted_central(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    h: f64,
    weights: &[f64],
) -> Result<GradientEstimate> {
    check_point(f, x)?;
    positive("sigma", sigma)?;
    positive("h", h)?;
    let mut c = Counted::new(f);
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut terms = Vec::with_capacity(weights.len());
        for (j, w) in weights.iter().enumerate() {
            let t = sigma * ((j + 1) as f64 * h);
            let plus = c.eval_axis(x, i, t)?;
            let minus = c.eval_axis(x, i, -t)?;
            terms.push(w * ((plus - minus) / (2.0 * t)));
        }
        g.push(neumaier_sum(terms));
    }
    Ok(c.finish(g))
}

/// Normalized mixed central differences with a precomputed table.
pub fn nmxfd_with(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    table: &CoefficientTable,
) -> Result<GradientEstimate> {
    weighted_central(f, x, sigma, table.h, &table.normalized)
}

/// Normalized mixed central differences, `Σ_j a_j δ_j` with `a = mixing_coefficients(m, h)`.
pub fn nmxfd(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    m: usize,
    h: f64,
) -> Result<GradientEstimate> {
    nmxfd_with(f, x, sigma, &mixing_coefficients(m, h)?)
}

pub fn mxfd_unnormalized_with(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    table: &CoefficientTable,
) -> Result<GradientEstimate> {
    weighted_central(f, x, sigma, table.h, &table.raw)
}

/// The trapezoidal rule itself, `Σ_j a′_j δ_j`; equals `C` times [`nmxfd`].
pub fn mxfd_unnormalized(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    m: usize,
    h: f64,
) -> Result<GradientEstimate> {
    mxfd_unnormalized_with(f, x, sigma, &mixing_coefficients(m, h)?)
}

/// Plain average of central differences at steps `σh, 2σh, …, mσh`.
pub fn raw_average_cfd(
    f: &mut dyn Evaluator,
    x: &[f64],
    sigma: f64,
    m: usize,
    h: f64,
) -> Result<GradientEstimate> {
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    let w = vec![1.0 / m as f64; m];
    weighted_central(f, x, sigma, h, &w)
}

/// User-facing parameters before defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub scheme: Scheme,
    pub sigma: f64,
    pub h: Option<f64>,
    pub m: Option<usize>,
    /// Truncation half-width `S`.
    pub s: Option<f64>,
    /// Sampled directions `M`.
    pub directions: Option<usize>,
    pub seed: u64,
}

/// Fully resolved estimator configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub scheme: Scheme,
    pub sigma: f64,
    pub h: f64,
    pub m: usize,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "M")]
    pub directions: usize,
    pub seed: u64,
}

impl EstimatorParams {
    pub fn new(scheme: Scheme, sigma: f64) -> Self {
        Self {
            scheme,
            sigma,
            h: None,
            m: None,
            s: None,
            directions: None,
            seed: 0,
        }
    }

    /// Applies defaults: `m = 1`; for the mixed schemes `S = 3` and `h = S/m`; for
    /// FFD/CFD `h = 1`; `M = 1`. When both `h` and `S` are given they must satisfy
    /// `S = m·h`.
    pub fn resolve(&self) -> Result<EstimatorConfig> {
        positive("sigma", self.sigma)?;
        let m = self.m.unwrap_or(1);
        if m == 0 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        let mf = m as f64;
        let (h, s) = match (self.h, self.s) {
            (Some(h), Some(s)) => {
                positive("h", h)?;
                positive("S", s)?;
                if (s - mf * h).abs() > 1e-15 * s.max(1.0) {
                    return Err(Error::invalid(
                        "S",
                        format!("S = {s} is inconsistent with m·h = {}", mf * h),
                    ));
                }
                (h, s)
            }
            (Some(h), None) => (positive("h", h)?, mf * h),
            (None, Some(s)) => (positive("S", s)? / mf, s),
            (None, None) if self.scheme.is_mixed() => (DEFAULT_HALF_WIDTH / mf, DEFAULT_HALF_WIDTH),
            (None, None) => (DEFAULT_CFD_H, mf * DEFAULT_CFD_H),
        };
        let directions = self.directions.unwrap_or(1);
        if directions == 0 {
            return Err(Error::invalid("M", "must be >= 1"));
        }
        Ok(EstimatorConfig {
            scheme: self.scheme,
            sigma: self.sigma,
            h,
            m,
            s,
            directions,
            seed: self.seed,
        })
    }
}

/// An [`EstimatorConfig`] with its coefficient table computed once.
#[derive(Debug, Clone)]
pub struct Estimator {
    config: EstimatorConfig,
    table: Option<CoefficientTable>,
}

impl Estimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        let table = match config.scheme {
            Scheme::Nmxfd | Scheme::MxfdRaw => Some(mixing_coefficients(config.m, config.h)?),
            _ => None,
        };
        Ok(Self { config, table })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn table(&self) -> Option<&CoefficientTable> {
        self.table.as_ref()
    }

    pub fn expected_evals(&self, n: usize) -> usize {
        self.config
            .scheme
            .evaluations(n, self.config.m, self.config.directions)
    }

    pub fn estimate(&self, f: &mut dyn Evaluator, x: &[f64]) -> Result<GradientEstimate> {
        self.estimate_seeded(f, x, self.config.seed)
    }

    /// As [`Estimator::estimate`] with the direction seed overridden.
    pub fn estimate_seeded(
        &self,
        f: &mut dyn Evaluator,
        x: &[f64],
        seed: u64,
    ) -> Result<GradientEstimate> {
        let c = &self.config;
        match c.scheme {
            Scheme::Ffd => ffd(f, x, c.sigma * c.h),
            Scheme::Cfd => cfd(f, x, c.sigma, c.h),
            Scheme::Gsg => gsg(f, x, c.sigma, c.directions, seed),
            Scheme::Cgsg => cgsg(f, x, c.sigma, c.directions, seed),
            Scheme::Nmxfd => nmxfd_with(f, x, c.sigma, self.table.as_ref().expect("table")),
            Scheme::MxfdRaw => {
                mxfd_unnormalized_with(f, x, c.sigma, self.table.as_ref().expect("table"))
            }
            Scheme::AvgCfd => raw_average_cfd(f, x, c.sigma, c.m, c.h),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Exact, FnObjective, Objective};
    use proptest::prelude::*;

    fn one_d(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> FnObjective {
        FnObjective::new("1d", 1, move |x| f(x[0]))
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ffd_examples() {
        let c = FnObjective::new("const", 3, |_| 7.0);
        let e = ffd(&mut Exact(&c), &[1.0, -2.0, 0.5], 0.1).unwrap();
        assert_eq!(e.vector, vec![0.0; 3]);
        assert_eq!(e.evals, 4);

        let sq = one_d(|x| x * x);
        let e = ffd(&mut Exact(&sq), &[1.0], 0.1).unwrap();
        assert!(close(e.vector[0], 2.1, 1e-13));

        let lin = one_d(|x| 3.0 * x);
        for (x, step) in [(0.0, 0.5), (2.0, 0.25), (-4.0, 1.0)] {
            assert_eq!(ffd(&mut Exact(&lin), &[x], step).unwrap().vector[0], 3.0);
        }
    }

    #[test]
    fn cfd_examples() {
        let sq = one_d(|x| x * x);
        let e = cfd(&mut Exact(&sq), &[1.0], 0.1, 1.0).unwrap();
        // (1.1² − 0.9²)/0.2 carries one rounding of the operands
        assert!(close(e.vector[0], 2.0, 1e-14));
        assert_eq!(e.evals, 2);

        let cube = one_d(|x| x * x * x);
        let e = cfd(&mut Exact(&cube), &[0.0], 0.1, 1.0).unwrap();
        assert!(close(e.vector[0], 0.01, 1e-16));

        let sin = one_d(f64::sin);
        let e = cfd(&mut Exact(&sin), &[0.0], 0.5, 1.0).unwrap();
        assert!(close(e.vector[0], 0.5f64.sin() / 0.5, 1e-15));
        assert!(close(e.vector[0], 0.958851, 1e-6));
    }

    #[test]
    fn bad_arguments() {
        let sq = one_d(|x| x * x);
        assert!(cfd(&mut Exact(&sq), &[1.0], 0.0, 1.0).is_err());
        assert!(cfd(&mut Exact(&sq), &[1.0, 2.0], 0.1, 1.0).is_err());
        assert!(ffd(&mut Exact(&sq), &[f64::NAN], 0.1).is_err());
        assert!(gsg(&mut Exact(&sq), &[1.0], 0.1, 0, 1).is_err());
        assert!(nmxfd(&mut Exact(&sq), &[1.0], 0.1, 0, 1.0).is_err());
        assert!(raw_average_cfd(&mut Exact(&sq), &[1.0], 0.1, 0, 1.0).is_err());
    }

    #[test]
    fn non_finite_values_fail_with_context() {
        let log = one_d(f64::ln);
        let err = cfd(&mut Exact(&log), &[0.05], 0.1, 1.0).unwrap_err();
        match err {
            Error::NonFinite { objective, point, value } => {
                assert_eq!(objective, "1d");
                assert!(close(point[0], -0.05, 1e-15));
                assert!(value.is_nan());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gsg_examples() {
        let c = FnObjective::new("const", 2, |_| 7.0);
        let e = gsg(&mut Exact(&c), &[0.3, 0.4], 0.1, 50, 3).unwrap();
        assert_eq!(e.vector, vec![0.0, 0.0]);
        assert_eq!(e.evals, 51);

        let lin = FnObjective::new("lin", 2, |x| x[0] + 2.0 * x[1]);
        let a = gsg(&mut Exact(&lin), &[1.0, 1.0], 0.01, 1000, 77).unwrap();
        let b = gsg(&mut Exact(&lin), &[1.0, 1.0], 0.01, 1000, 77).unwrap();
        assert_eq!(a, b);

        // per-sample value (aᵀs)s has covariance aaᵀ + ‖a‖² I
        let m = 100_000;
        let e = gsg(&mut Exact(&lin), &[1.0, 1.0], 0.01, m, 11).unwrap();
        let a_vec = [1.0, 2.0];
        let norm2 = 5.0;
        for i in 0..2 {
            let sd = ((a_vec[i] * a_vec[i] + norm2) / m as f64).sqrt();
            assert!((e.vector[i] - a_vec[i]).abs() <= 3.0 * sd, "i={i} {:?}", e.vector);
        }
    }

    #[test]
    fn cgsg_examples() {
        let c = FnObjective::new("const", 2, |_| -1.5);
        let e = cgsg(&mut Exact(&c), &[0.3, 0.4], 0.1, 20, 3).unwrap();
        assert_eq!(e.vector, vec![0.0, 0.0]);
        assert_eq!(e.evals, 40);

        // per-sample value is exactly 2x·s², whose variance is 4x²·2
        let sq = one_d(|x| x * x);
        let m = 100_000;
        let e = cgsg(&mut Exact(&sq), &[1.0], 0.1, m, 5).unwrap();
        let sd = (8.0 / m as f64).sqrt();
        assert!((e.vector[0] - 2.0).abs() <= 3.0 * sd);
        let again = cgsg(&mut Exact(&sq), &[1.0], 0.1, m, 5).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn nmxfd_examples() {
        let sq = one_d(|x| x * x);
        let cube = one_d(|x| x * x * x);
        for x in [-1.3, 0.0, 0.7] {
            let a = cfd(&mut Exact(&cube), &[x], 0.1, 0.4).unwrap();
            let b = nmxfd(&mut Exact(&cube), &[x], 0.1, 1, 0.4).unwrap();
            assert_eq!(a.vector[0].to_bits(), b.vector[0].to_bits());
        }
        let e = nmxfd(&mut Exact(&sq), &[1.0], 0.1, 4, 0.75).unwrap();
        assert!(close(e.vector[0], 2.0, 1e-12));
        assert_eq!(e.evals, 8);

        // Σ a_j (σjh)² with the (m=2, h=1) table
        let e = nmxfd(&mut Exact(&cube), &[0.0], 0.1, 2, 1.0).unwrap();
        assert!(close(e.vector[0], 0.0192569, 1e-6));
        assert!(close(e.vector[0], 0.01925684637891317, 1e-15));
    }

    #[test]
    fn mxfd_unnormalized_examples() {
        let lin = one_d(|x| x);
        let e = mxfd_unnormalized(&mut Exact(&lin), &[0.4], 0.1, 2, 1.0).unwrap();
        assert!(close(e.vector[0], 0.69990532, 1e-8));

        let rosen = FnObjective::new("rosenbrock", 2, |x| {
            (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
        });
        let x = [-1.2, 1.0];
        let table = mixing_coefficients(8, 0.375).unwrap();
        let raw = mxfd_unnormalized(&mut Exact(&rosen), &x, 1e-3, 8, 0.375).unwrap();
        let norm = nmxfd(&mut Exact(&rosen), &x, 1e-3, 8, 0.375).unwrap();
        for (r, n) in raw.vector.iter().zip(&norm.vector) {
            assert!(((r - table.total * n) / r).abs() <= 1e-14);
        }

        let c = FnObjective::new("const", 2, |_| 4.0);
        let e = mxfd_unnormalized(&mut Exact(&c), &[1.0, 2.0], 0.1, 3, 0.5).unwrap();
        assert_eq!(e.vector, vec![0.0, 0.0]);
    }

    #[test]
    fn raw_average_examples() {
        let lin = one_d(|x| 3.0 * x);
        let e = raw_average_cfd(&mut Exact(&lin), &[0.0], 0.1, 4, 0.5).unwrap();
        assert!(close(e.vector[0], 3.0, 1e-14));

        let cube = one_d(|x| x * x * x);
        let e = raw_average_cfd(&mut Exact(&cube), &[0.0], 0.1, 3, 1.0).unwrap();
        assert!(close(e.vector[0], 0.01 * 14.0 / 3.0, 1e-15));

        let a = raw_average_cfd(&mut Exact(&cube), &[0.3], 0.1, 1, 0.6).unwrap();
        let b = cfd(&mut Exact(&cube), &[0.3], 0.1, 0.6).unwrap();
        assert_eq!(a.vector, b.vector);
    }

    #[test]
    fn cfd_single_term_bound_on_cubics() {
        // δ_j − ∂f = σ²(jh)² exactly for Σx³; bound Hσ²(jh)²/6 with H = 6
        let cube = FnObjective::new("cubic", 2, |x| x.iter().map(|v| v.powi(3)).sum());
        for sigma in [1e-1, 1e-2] {
            for j in 1..=4 {
                let h = 0.5;
                let x = [0.7, -1.1];
                let e = cfd(&mut Exact(&cube), &x, sigma, j as f64 * h).unwrap();
                let bound = 6.0 * sigma * sigma * (j as f64 * h).powi(2) / 6.0;
                for (g, xi) in e.vector.iter().zip(&x) {
                    assert!((g - 3.0 * xi * xi).abs() <= bound * (1.0 + 1e-9) + 1e-14);
                }
            }
        }
    }

    #[test]
    fn evaluation_counts() {
        for n in 1..=4 {
            let f = FnObjective::new("sum", n, |x| x.iter().map(|v| v.sin()).sum());
            let x = vec![0.2; n];
            for m in 1..=3 {
                for dirs in [1, 3, 7] {
                    for scheme in Scheme::ALL {
                        let cfg = EstimatorParams {
                            m: Some(m),
                            directions: Some(dirs),
                            ..EstimatorParams::new(scheme, 0.01)
                        }
                        .resolve()
                        .unwrap();
                        let est = Estimator::new(cfg).unwrap();
                        let e = est.estimate(&mut Exact(&f), &x).unwrap();
                        assert_eq!(e.evals, scheme.evaluations(n, m, dirs), "{scheme} n={n}");
                        assert_eq!(e.evals, est.expected_evals(n));
                    }
                }
            }
        }
    }

    #[test]
    fn params_resolution() {
        let p = EstimatorParams { m: Some(4), ..EstimatorParams::new(Scheme::Nmxfd, 0.1) };
        let c = p.resolve().unwrap();
        assert_eq!((c.h, c.s), (0.75, 3.0));
        let p = EstimatorParams { m: Some(4), s: Some(2.0), ..EstimatorParams::new(Scheme::Nmxfd, 0.1) };
        assert_eq!(p.resolve().unwrap().h, 0.5);
        let p = EstimatorParams { m: Some(4), s: Some(2.0), h: Some(0.6), ..EstimatorParams::new(Scheme::Nmxfd, 0.1) };
        assert!(p.resolve().is_err());
        let c = EstimatorParams::new(Scheme::Cfd, 0.1).resolve().unwrap();
        assert_eq!(c.h, 1.0);
        assert!(EstimatorParams::new(Scheme::Cfd, -0.1).resolve().is_err());
        assert_eq!("nmxfd".parse::<Scheme>().unwrap(), Scheme::Nmxfd);
        assert_eq!("avg-cfd".parse::<Scheme>().unwrap(), Scheme::AvgCfd);
        assert!("bogus".parse::<Scheme>().is_err());
    }

    #[test]
    fn direction_streams_are_prefix_stable() {
        // estimate order and M do not change which direction index k receives
        let lin = FnObjective::new("lin", 3, |x| x[0] - x[1] + 0.5 * x[2]);
        let x = [0.1, 0.2, 0.3];
        let one = cgsg(&mut Exact(&lin), &x, 0.1, 1, 9).unwrap();
        let s0 = gaussian_direction(9, 0, 3);
        let proj = s0[0] - s0[1] + 0.5 * s0[2];
        for i in 0..3 {
            assert!(close(one.vector[i], proj * s0[i], 1e-12));
        }
        let _ = cgsg(&mut Exact(&lin), &x, 0.1, 5, 10).unwrap();
        let again = cgsg(&mut Exact(&lin), &x, 0.1, 1, 9).unwrap();
        assert_eq!(one, again);
    }

    proptest! {
        #[test]
        fn quadratic_exactness(
            a in proptest::collection::vec(-3.0f64..3.0, 3),
            b in proptest::collection::vec(-3.0f64..3.0, 3),
            x in proptest::collection::vec(-2.0f64..2.0, 3),
            sigma in 1e-4f64..0.5,
            m in 1usize..10,
            s in 0.5f64..4.0,
        ) {
            let (aa, bb) = (a.clone(), b.clone());
            // f = Σ a_i x_i² + b_i x_i + x_0 x_1
            let f = FnObjective::new("quad", 3, move |x| {
                x.iter().enumerate().map(|(i, v)| aa[i] * v * v + bb[i] * v).sum::<f64>() + x[0] * x[1]
            });
            let grad: Vec<f64> = (0..3).map(|i| {
                2.0 * a[i] * x[i] + b[i] + match i { 0 => x[1], 1 => x[0], _ => 0.0 }
            }).collect();
            let e = nmxfd(&mut Exact(&f), &x, sigma, m, s / m as f64).unwrap();
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            // roundoff of a difference quotient grows like ε|f|/(σh)
            let slack = 1e-10 * (1.0 + gnorm) + 64.0 * f64::EPSILON * (1.0 + f.value(&x).abs()) / (sigma * s / m as f64);
            for (g, t) in e.vector.iter().zip(&grad) {
                prop_assert!((g - t).abs() <= slack, "{g} vs {t}");
            }
        }

        #[test]
        fn normalization_identity(x0 in -2.0f64..2.0, x1 in -2.0f64..2.0, m in 1usize..12, sigma in 1e-3f64..0.3) {
            let f = FnObjective::new("mix", 2, |x| (x[0]).exp() * x[1].sin() + x[0].powi(4));
            let table = mixing_coefficients(m, 3.0 / m as f64).unwrap();
            let raw = mxfd_unnormalized_with(&mut Exact(&f), &[x0, x1], sigma, &table).unwrap();
            let norm = nmxfd_with(&mut Exact(&f), &[x0, x1], sigma, &table).unwrap();
            for (r, n) in raw.vector.iter().zip(&norm.vector) {
                prop_assert!((r - table.total * n).abs() <= 1e-13 * (1.0 + r.abs()));
            }
        }
    }
}
