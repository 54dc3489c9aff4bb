//! Objective functions and the evaluation interface consumed by the estimators.

use std::fmt;

/// A smooth scalar function on `ℝⁿ` with optional analytic gradient and smoothness
/// constants.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Lipschitz constant `L` of the gradient, when known globally.
    fn lipschitz_grad(&self) -> Option<f64> {
        None
    }

    /// Lipschitz constant `H` of the Hessian, when known globally.
    fn lipschitz_hess(&self) -> Option<f64> {
        None
    }

    /// Default starting point `x⁰`.
    fn start(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }

    /// Per-coordinate box `[lo, hi]` on which value and gradient are finite.
    fn domain(&self) -> (f64, f64) {
        (-5.0, 5.0)
    }
}

impl fmt::Debug for dyn Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name())
            .field("dim", &self.dim())
            .finish()
    }
}

/// Call interface used by the estimators. Implementations may be stateful (noise
/// streams), so evaluation takes `&mut self`.
pub trait Evaluator {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn evaluate(&mut self, x: &[f64]) -> f64;
}

/// Noise-free evaluation of an [`Objective`].
pub struct Exact<'a>(pub &'a dyn Objective);

impl Evaluator for Exact<'_> {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Objective assembled from closures. Used for user plug-ins and tests.
pub struct FnObjective {
    name: String,
    dim: usize,
    value: Box<ValueFn>,
    gradient: Option<Box<GradFn>>,
    lipschitz_grad: Option<f64>,
    lipschitz_hess: Option<f64>,
    start: Option<Vec<f64>>,
    domain: (f64, f64),
}

impl FnObjective {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            value: Box::new(value),
            gradient: None,
            lipschitz_grad: None,
            lipschitz_hess: None,
            start: None,
            domain: (-5.0, 5.0),
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    pub fn with_lipschitz_grad(mut self, l: f64) -> Self {
        self.lipschitz_grad = Some(l);
        self
    }

    pub fn with_lipschitz_hess(mut self, h: f64) -> Self {
        self.lipschitz_hess = Some(h);
        self
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }
}

impl Objective for FnObjective {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        self.lipschitz_grad
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        self.lipschitz_hess
    }
    fn start(&self) -> Vec<f64> {
        self.start.clone().unwrap_or_else(|| vec![1.0; self.dim])
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
