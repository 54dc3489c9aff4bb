use crate::error::{Error, Result};
use crate::objective::{norm2, Objective};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ALPHAS: [f64; 7] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketPoint {
    /// Position of the iterate in the trajectory.
    pub index: usize,
    pub point: Vec<f64>,
    /// `‖∇f(x^k)‖ / ‖∇f(x⁰)‖`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSet {
    pub function: String,
    pub alphas: Vec<f64>,
    /// One entry per threshold; `None` when the trajectory never reaches it.
    pub points: Vec<Option<BucketPoint>>,
}

/// First iterate meeting `‖∇f(x^k)‖/‖∇f(x⁰)‖ ≤ α`, for each `α`.
pub fn extract_buckets(
    trajectory: &[Vec<f64>],
    f: &dyn Objective,
    alphas: &[f64],
) -> Result<BucketSet> {
    let Some(x0) = trajectory.first() else {
        return Err(Error::invalid("trajectory", "must contain at least the starting point"));
    };
    let grad = |x: &[f64]| {
        f.gradient(x)
            .ok_or_else(|| Error::MissingGradient(f.name().to_string()))
    };
    let g0 = norm2(&grad(x0)?);
    if g0 == 0.0 {
        return Err(Error::ZeroInitialGradient(f.name().to_string()));
    }
    let ratios = trajectory
        .iter()
        .map(|x| Ok(norm2(&grad(x)?) / g0))
        .collect::<Result<Vec<f64>>>()?;
    let points = alphas
        .iter()
        .map(|&alpha| {
            ratios.iter().position(|&r| r <= alpha).map(|k| BucketPoint {
                index: k,
                point: trajectory[k].clone(),
                ratio: ratios[k],
            })
        })
        .collect();
    Ok(BucketSet {
        function: f.name().to_string(),
        alphas: alphas.to_vec(),
        points,
    })
}
