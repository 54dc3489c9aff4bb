//! Gradient estimation by normalized mixed central differences, with reference
//! schemes, noise model, error bounds and a bucketed benchmark harness.

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod kernels;
pub mod noise;
pub mod objective;
pub mod oracles;
pub mod streams;
pub mod testfns;

pub use coefficients::{mixing_coefficients, CoefficientTable};
pub use error::{Error, Result};
pub use estimators::{Estimator, EstimatorConfig, EstimatorParams, GradientEstimate, Scheme};
pub use noise::{noisy_wrap, NoiseSpec, Noisy};
pub use objective::{Evaluator, Exact, FnObjective, Objective};
