use crate::coefficients::mixing_coefficients;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorParams, Scheme};
use crate::noise::{noisy_wrap, NoiseSpec};
use crate::objective::{Exact, Objective};
use crate::oracles::{variance_cfd, variance_nmxfd};
use crate::streams::derive_seed;
use serde::{Deserialize, Serialize};

pub const MIN_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub scheme: Scheme,
    pub function: String,
    pub x: Vec<f64>,
    pub sigma: f64,
    pub h: f64,
    pub m: usize,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    /// Sample trace of the covariance of `ĝ_noisy − ĝ_exact`.
    pub empirical: f64,
    /// Closed-form value, for the schemes that are linear in the noise with fixed steps.
    pub theoretical: Option<f64>,
}

/// Theoretical trace of the noise covariance, when it has a closed form.
pub fn theoretical_variance(scheme: Scheme, n: usize, lambda: f64, sigma: f64, h: f64, m: usize) -> Result<Option<f64>> {
    Ok(match scheme {
        Scheme::Cfd => Some(variance_cfd(n, lambda, sigma, h)),
        Scheme::Nmxfd => Some(variance_nmxfd(n, lambda, sigma, h, m)?),
        Scheme::MxfdRaw => {
            let c = mixing_coefficients(m, h)?.total;
            Some(c * c * variance_nmxfd(n, lambda, sigma, h, m)?)
        }
        Scheme::AvgCfd => {
            let factor: f64 = (1..=m).map(|j| 1.0 / (j * j) as f64).sum::<f64>() / (m * m) as f64;
            Some(variance_cfd(n, lambda, sigma, h) * factor)
        }
        Scheme::Ffd => {
            // each component is (ε_i − ε_0)/t
            let t = sigma * h;
            Some(2.0 * n as f64 * lambda * lambda / (t * t))
        }
        Scheme::Gsg | Scheme::Cgsg => None,
    })
}

/// Runs `scheme` `trials` times under independent noise and compares the sample trace of
/// the error covariance with the closed form.
#[allow(clippy::too_many_arguments)]
pub fn variance_experiment(
    scheme: Scheme,
    f: &dyn Objective,
    x: &[f64],
    sigma: f64,
    h: f64,
    m: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid("trials", format!("need at least {MIN_TRIALS}, got {trials}")));
    }
    let mut params = EstimatorParams::new(scheme, sigma);
    params.h = Some(h);
    params.m = Some(m);
    params.directions = Some(m.max(1) * x.len());
    params.seed = seed;
    let est = Estimator::new(params.resolve()?)?;
    let exact = est.estimate(&mut Exact(f), x)?.vector;
    let n = x.len();
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    for k in 0..trials {
        let spec = NoiseSpec::new(lambda, derive_seed(seed, &[k as u64]))?;
        let mut noisy = noisy_wrap(f, spec)?;
        let g = est.estimate(&mut noisy, x)?.vector;
        for i in 0..n {
            let e = g[i] - exact[i];
            let delta = e - mean[i];
            mean[i] += delta / (k + 1) as f64;
            m2[i] += delta * (e - mean[i]);
        }
    }
    let empirical = m2.iter().sum::<f64>() / (trials - 1) as f64;
    Ok(VarianceReport {
        scheme,
        function: f.name().to_string(),
        x: x.to_vec(),
        sigma,
        h,
        m,
        lambda,
        trials,
        seed,
        empirical,
        theoretical: theoretical_variance(scheme, n, lambda, sigma, h, m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfns::lookup;

    #[test]
    fn zero_noise_has_zero_variance() {
        let f = lookup("sphere", Some(1)).unwrap();
        let r = variance_experiment(Scheme::Cfd, f.as_ref(), &[0.5], 1e-2, 1.0, 1, 0.0, MIN_TRIALS, 1).unwrap();
        assert!(r.empirical <= 1e-20);
    }

    #[test]
    fn trial_floor() {
        let f = lookup("sphere", Some(1)).unwrap();
        assert!(variance_experiment(Scheme::Cfd, f.as_ref(), &[0.5], 1e-2, 1.0, 1, 1e-3, 10, 1).is_err());
    }

    #[test]
    fn ffd_and_average_closed_forms() {
        let f = lookup("trig_sum", Some(2)).unwrap();
        for (scheme, m) in [(Scheme::Ffd, 1), (Scheme::AvgCfd, 3), (Scheme::MxfdRaw, 3)] {
            let r = variance_experiment(scheme, f.as_ref(), &[0.2, -0.4], 1e-2, 1.0, m, 1e-3, 40_000, 5).unwrap();
            let t = r.theoretical.unwrap();
            assert!((r.empirical / t - 1.0).abs() < 0.05, "{scheme}: {} vs {t}", r.empirical);
        }
    }
}
