//! Reference integrals and closed-form error/variance bounds.

pub mod quadrature;

use crate::coefficients::mixing_coefficients;
use crate::error::{Error, Result};
use crate::kernels::pdf;
use crate::objective::Objective;
use crate::streams;
use quadrature::{adaptive, QuadratureOptions};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Truncation radius standing in for infinite Gaussian integrals.
pub const TRUNCATION: f64 = 8.0;

/// Largest dimension handled by tensor-product quadrature.
pub const MAX_TENSOR_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: f64,
    pub observed: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(bound: f64, observed: f64) -> Self {
        Self {
            bound,
            observed,
            satisfied: observed <= bound * (1.0 + 1e-9),
        }
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn axis(f: &dyn Objective, x: &[f64], i: usize) -> Result<()> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if i >= x.len() {
        return Err(Error::invalid("i", format!("axis {i} out of range for n = {}", x.len())));
    }
    Ok(())
}

/// `(1/σ)∫_{−S}^{S} f(x + σs e_i) s φ(s) ds`, by adaptive quadrature to absolute tolerance `tol`.
///
/// The integral is folded onto `[0, S]` as `∫₀ˢ (f(x+σs e_i) − f(x−σs e_i))/σ · s φ(s) ds`,
/// which removes the constant part of `f` before integration.
pub fn filtered_derivative_oracle(
    f: &dyn Objective,
    x: &[f64],
    i: usize,
    sigma: f64,
    s: f64,
    tol: f64,
) -> Result<f64> {
    axis(f, x, i)?;
    check_positive("sigma", sigma)?;
    check_positive("S", s)?;
    check_positive("tol", tol)?;
    let mut y = x.to_vec();
    let integrand = |t: f64| {
        y[i] = x[i] + sigma * t;
        let plus = f.value(&y);
        y[i] = x[i] - sigma * t;
        let minus = f.value(&y);
        (plus - minus) / sigma * t * pdf(t)
    };
    Ok(adaptive(integrand, 0.0, s, &QuadratureOptions::with_tol(tol))?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingAccuracy {
    /// Nested adaptive quadrature over `[−8, 8]ⁿ`, absolute tolerance per component.
    Tensor { tol: f64 },
    /// Sample average over `samples` seeded Gaussian directions.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedGradient {
    pub value: Vec<f64>,
    /// Per-component standard error (Monte Carlo mode only).
    pub std_error: Option<Vec<f64>>,
    pub evaluations: usize,
}

/// `G_σ(x) = (1/σ)∫ f(x+σs) s φ(s) ds` over `ℝⁿ`.
///
/// Both modes use the symmetrized integrand `(f(x+σs) − f(x−σs))/(2σ) · s`.
pub fn smoothed_gradient_oracle(
    f: &dyn Objective,
    x: &[f64],
    sigma: f64,
    accuracy: SmoothingAccuracy,
) -> Result<SmoothedGradient> {
    let n = x.len();
    if n != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: n,
        });
    }
    check_positive("sigma", sigma)?;
    let diff = |s: &[f64]| {
        let plus: Vec<f64> = x.iter().zip(s).map(|(a, b)| a + sigma * b).collect();
        let minus: Vec<f64> = x.iter().zip(s).map(|(a, b)| a - sigma * b).collect();
        (f.value(&plus) - f.value(&minus)) / (2.0 * sigma)
    };
    match accuracy {
        SmoothingAccuracy::Tensor { tol } => {
            if n > MAX_TENSOR_DIM {
                return Err(Error::DimensionTooLarge {
                    n,
                    max: MAX_TENSOR_DIM,
                });
            }
            check_positive("tol", tol)?;
            let mut value = Vec::with_capacity(n);
            let mut evaluations = 0;
            for i in 0..n {
                let g = |s: &[f64]| diff(s) * s[i] * s.iter().map(|&t| pdf(t)).product::<f64>();
                let (v, e) = cube_integral(&g, n, tol)?;
                value.push(v);
                evaluations += e;
            }
            Ok(SmoothedGradient {
                value,
                std_error: None,
                evaluations,
            })
        }
        SmoothingAccuracy::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::invalid("samples", "Monte Carlo mode needs at least 2 samples"));
            }
            let mut rng = streams::rng(seed);
            let mut mean = vec![0.0; n];
            let mut m2 = vec![0.0; n];
            let mut s = vec![0.0; n];
            for k in 0..samples {
                for v in s.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                let d = diff(&s);
                for i in 0..n {
                    // Welford update
                    let sample = d * s[i];
                    let delta = sample - mean[i];
                    mean[i] += delta / (k + 1) as f64;
                    m2[i] += delta * (sample - mean[i]);
                }
            }
            let std_error = m2
                .iter()
                .map(|v| (v / (samples - 1) as f64 / samples as f64).sqrt())
                .collect();
            Ok(SmoothedGradient {
                value: mean,
                std_error: Some(std_error),
                evaluations: 2 * samples,
            })
        }
    }
}

/// Iterated adaptive quadrature of `g` over `[−8, 8]ⁿ`.
fn cube_integral(g: &dyn Fn(&[f64]) -> f64, n: usize, tol: f64) -> Result<(f64, usize)> {
    fn level(
        g: &dyn Fn(&[f64]) -> f64,
        prefix: &[f64],
        remaining: usize,
        tol: f64,
        count: &mut usize,
    ) -> Result<f64> {
        let width = 2.0 * TRUNCATION;
        let inner_tol = tol / (2.0 * width);
        let mut failure = None;
        let mut point = prefix.to_vec();
        point.push(0.0);
        let last = point.len() - 1;
        let q = adaptive(
            |t| {
                point[last] = t;
                if remaining == 1 {
                    *count += 1;
                    g(&point)
                } else if failure.is_some() {
                    0.0
                } else {
                    match level(g, &point, remaining - 1, inner_tol, count) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                }
            },
            -TRUNCATION,
            TRUNCATION,
            &QuadratureOptions::with_tol(tol),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(q?.value)
    }
    let mut count = 0;
    let v = level(g, &[], n, tol, &mut count)?;
    Ok((v, count))
}

/// `L σ √(n(15 + 7(n−1)))`: gap between the smoothed gradient and the vector of filtered
/// derivatives.
pub fn smoothing_gap_bound(l: f64, sigma: f64, n: usize) -> f64 {
    let n = n as f64;
    l * sigma * (n * (15.0 + 7.0 * (n - 1.0))).sqrt()
}

/// `C_φ L σ`, for a caller-supplied kernel constant `C_φ`.
pub fn kernel_gap_bound_lipschitz(c_phi: f64, l: f64, sigma: f64) -> f64 {
    c_phi * l * sigma
}

/// `C_φ H σ²`, for a caller-supplied kernel constant `C_φ`.
pub fn kernel_gap_bound_hessian(c_phi: f64, h: f64, sigma: f64) -> f64 {
    c_phi * h * sigma * sigma
}

/// `√n H σ² S² / 6`.
pub fn nmxfd_error_bound(h: f64, sigma: f64, s: f64, n: usize) -> f64 {
    (n as f64).sqrt() * h * sigma * sigma * s * s / 6.0
}

/// `H σ² (jh)² / 6` for the single central difference at step `σjh`.
pub fn cfd_error_bound(big_h: f64, sigma: f64, h: f64, j: usize) -> f64 {
    let t = j as f64 * h;
    big_h * sigma * sigma * t * t / 6.0
}

/// `n λ² / (2σ²h²)`: trace of the noise covariance of central differences.
pub fn variance_cfd(n: usize, lambda: f64, sigma: f64, h: f64) -> f64 {
    let t = sigma * h;
    n as f64 * lambda * lambda / (2.0 * t * t)
}

/// `variance_cfd · Σ a_j²/j²`.
pub fn variance_nmxfd(n: usize, lambda: f64, sigma: f64, h: f64, m: usize) -> Result<f64> {
    let table = mixing_coefficients(m, h)?;
    Ok(variance_cfd(n, lambda, sigma, h) * table.variance_factor())
}

/// `√n H σ² m² h² / 6`.
pub fn bias_bound_nmxfd(big_h: f64, sigma: f64, m: usize, h: f64, n: usize) -> f64 {
    nmxfd_error_bound(big_h, sigma, m as f64 * h, n)
}

const SAFETY: f64 = 1.5;

fn hessian(f: &dyn Objective, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    if f.gradient(x).is_some() {
        for j in 0..n {
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[j] += step;
            b[j] -= step;
            let ga = f.gradient(&a).unwrap_or_default();
            let gb = f.gradient(&b).unwrap_or_default();
            for i in 0..n {
                out[i][j] = (ga[i] - gb[i]) / (2.0 * step);
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                let at = |di: f64, dj: f64| {
                    let mut y = x.to_vec();
                    y[i] += di;
                    y[j] += dj;
                    f.value(&y)
                };
                out[i][j] = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step))
                    / (4.0 * step * step);
            }
        }
    }
    out
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn box_points(center: &[f64], radius: f64, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = streams::rng(seed);
    let mut pts = vec![center.to_vec()];
    for _ in 0..samples {
        pts.push(center.iter().map(|c| c + rng.random_range(-radius..=radius)).collect());
    }
    for corner in 0..(1usize << center.len().min(10)) {
        pts.push(
            center
                .iter()
                .enumerate()
                .map(|(k, c)| if corner >> k & 1 == 1 { c + radius } else { c - radius })
                .collect(),
        );
    }
    pts
}

/// Overestimate of the gradient Lipschitz constant on `center ± radius`: the largest
/// Frobenius norm of a difference-quotient Hessian over sampled points, times 1.5.
pub fn estimate_lipschitz_grad(
    f: &dyn Objective,
    center: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let step = 1e-4 * (1.0 + radius);
    box_points(center, radius, samples, seed)
        .iter()
        .map(|p| frobenius(&hessian(f, p, step)))
        .fold(0.0, f64::max)
        * SAFETY
}

/// Overestimate of the Hessian Lipschitz constant on `center ± radius`, from Hessian
/// differences between sampled point pairs, times 1.5.
pub fn estimate_lipschitz_hess(
    f: &dyn Objective,
    center: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let step = 1e-4 * (1.0 + radius);
    let pts = box_points(center, radius, samples, seed);
    let hs: Vec<_> = pts.iter().map(|p| hessian(f, p, step)).collect();
    let mut best: f64 = 0.0;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let dist = pts[a].iter().zip(&pts[b]).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            if dist <= 1e-3 * radius {
                continue;
            }
            let diff: Vec<Vec<f64>> = hs[a]
                .iter()
                .zip(&hs[b])
                .map(|(r, s)| r.iter().zip(s).map(|(u, v)| u - v).collect())
                .collect();
            best = best.max(frobenius(&diff) / dist);
        }
    }
    best * SAFETY
}
