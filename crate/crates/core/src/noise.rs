//! Additive Gaussian observation noise.

use crate::error::{Error, Result};
use crate::objective::{Evaluator, Objective};
use crate::streams;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub const DEFAULT_LAMBDA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise standard deviation `λ`.
    pub lambda: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(lambda: f64, seed: u64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(
                "lambda",
                format!("must be finite and >= 0, got {lambda}"),
            ));
        }
        Ok(Self { lambda, seed })
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            seed: 0,
        }
    }
}

/// Objective observed through `f(x) + ε`, `ε ~ N(0, λ²)` i.i.d. per call.
///
/// The noise sequence is keyed only by call position. Repeated evaluations at the
/// same point draw fresh noise. The stream is owned, so one wrap must not be shared
/// between concurrent consumers.
pub struct Noisy<'a> {
    inner: &'a dyn Objective,
    lambda: f64,
    rng: ChaCha8Rng,
}

pub fn noisy_wrap<'a>(f: &'a dyn Objective, spec: NoiseSpec) -> Result<Noisy<'a>> {
    let spec = NoiseSpec::new(spec.lambda, spec.seed)?;
    Ok(Noisy {
        inner: f,
        lambda: spec.lambda,
        rng: streams::rng(spec.seed),
    })
}

impl Noisy<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Evaluator for Noisy<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        let exact = self.inner.value(x);
        if self.lambda == 0.0 {
            return exact;
        }
        let eps: f64 = StandardNormal.sample(&mut self.rng);
        exact + self.lambda * eps
    }
}
