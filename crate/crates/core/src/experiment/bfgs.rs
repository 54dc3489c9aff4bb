//! Inverse-Hessian BFGS with Armijo backtracking, used to lay out bucket points.

use crate::error::{Error, Result};
use crate::objective::{norm2, Objective};
use serde::{Deserialize, Serialize};

pub const DEFAULT_GRAD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 2000;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Iterates `x⁰ … x^K`.
    pub points: Vec<Vec<f64>>,
    /// Gradient-norm test met at the last iterate.
    pub converged: bool,
    /// Stopped early because the line search failed to make progress.
    pub truncated: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Minimizes `f` from `x0` and returns every accepted iterate.
///
/// Stops when `‖∇f(x^k)‖ ≤ grad_tol·(1 + ‖∇f(x⁰)‖)` or after `max_iter` steps.
pub fn bfgs_minimize(
    f: &dyn Objective,
    x0: &[f64],
    grad_tol: f64,
    max_iter: usize,
) -> Result<Trajectory> {
    if !(grad_tol > 0.0) {
        return Err(Error::invalid("grad_tol", format!("must be > 0, got {grad_tol}")));
    }
    if x0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x0.len(),
        });
    }
    let grad = |x: &[f64]| {
        f.gradient(x)
            .ok_or_else(|| Error::MissingGradient(f.name().to_string()))
    };
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f.value(&x);
    let mut g = grad(&x)?;
    let threshold = grad_tol * (1.0 + norm2(&g));
    let mut points = vec![x.clone()];
    if norm2(&g) <= threshold {
        return Ok(Trajectory {
            points,
            converged: true,
            truncated: false,
        });
    }

    let identity = |scale: f64| {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let mut hinv = identity(1.0);
    let mut first = true;

    for _ in 0..max_iter {
        let mut p: Vec<f64> = hinv.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            hinv = identity(1.0);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        let mut step = if first { (1.0 / norm2(&g)).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + step * b).collect();
            let ft = f.value(&trial);
            if ft.is_finite() && ft <= fx + ARMIJO * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            return Ok(Trajectory {
                points,
                converged: false,
                truncated: true,
            });
        };
        let gn = grad(&xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ys = dot(&y, &s);
        if ys > 1e-14 * norm2(&y) * norm2(&s) {
            if first {
                hinv = identity(ys / dot(&y, &y));
            }
            let rho = 1.0 / ys;
            let hy: Vec<f64> = hinv.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            // H ← (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ, expanded
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        first = false;
        let stalled = norm2(&s) <= f64::EPSILON * (1.0 + norm2(&x));
        x = xn;
        fx = fxn;
        g = gn;
        points.push(x.clone());
        if norm2(&g) <= threshold {
            return Ok(Trajectory {
                points,
                converged: true,
                truncated: false,
            });
        }
        if stalled {
            return Ok(Trajectory {
                points,
                converged: false,
                truncated: true,
            });
        }
    }
    Ok(Trajectory {
        points,
        converged: false,
        truncated: false,
    })
}
