//! Bucketed benchmark protocol: BFGS trajectories, gradient-ratio buckets, relative errors,
//! per-cell medians of `log10 η`, and report rendering.

pub mod bench;
pub mod bfgs;
pub mod buckets;
pub mod report;
pub mod variance;

pub use bench::{
    run_benchmark, run_benchmark_jobs, run_noisy_benchmark, run_noisy_benchmark_jobs, BenchConfig,
    BenchmarkReport, Cell, SchemeRuns,
};
pub use bfgs::{bfgs_minimize, Trajectory};
pub use buckets::{extract_buckets, BucketSet, DEFAULT_ALPHAS};
pub use report::{emit_table, Format};
pub use variance::{variance_experiment, VarianceReport};

use crate::error::{Error, Result};
use crate::objective::norm2;

/// `η = ‖g − ∇f‖₂ / ‖∇f‖₂`.
pub fn relative_error(g: &[f64], grad_true: &[f64]) -> Result<f64> {
    if g.len() != grad_true.len() {
        return Err(Error::DimensionMismatch {
            expected: grad_true.len(),
            got: g.len(),
        });
    }
    let denom = norm2(grad_true);
    if denom == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let diff: Vec<f64> = g.iter().zip(grad_true).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / denom)
}
