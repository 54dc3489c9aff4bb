//! Trapezoidal mixing weights for the mixed central-difference estimators.
//!
//! Folding the trapezoidal rule for `-(1/σ)∫_{-S}^{S} f(x + σs) φ′(s) ds` onto the
//! symmetric node pairs `±jh` turns it into a weighted sum of central differences
//! with step `σjh`. The raw weights are
//!
//! ```text
//! a′_j = 2 j h² |φ′(jh)|    j = 1..m-1
//! a′_m =   m h² |φ′(mh)|
//! ```
//!
//! and normalizing by their sum `C` makes them a convex combination.

use crate::error::{Error, Result};
use crate::kernels::pdf_deriv;
use crate::oracles::quadrature::neumaier_sum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub m: usize,
    pub h: f64,
    /// `a′_j`, index 0 holds `j = 1`.
    pub raw: Vec<f64>,
    /// `C = Σ a′_j`.
    pub total: f64,
    /// `a_j = a′_j / C`.
    pub normalized: Vec<f64>,
}

impl CoefficientTable {
    /// Truncation half-width `S = m·h`.
    pub fn half_width(&self) -> f64 {
        self.m as f64 * self.h
    }

    /// `Σ a_j² / j²`, the noise-variance reduction factor relative to a single
    /// central difference at step `σh`.
    pub fn variance_factor(&self) -> f64 {
        neumaier_sum(
            self.normalized
                .iter()
                .enumerate()
                .map(|(j, a)| (a / (j + 1) as f64).powi(2)),
        )
    }
}

pub fn mixing_coefficients(m: usize, h: f64) -> Result<CoefficientTable> {
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid("h", format!("must be finite and > 0, got {h}")));
    }
    let h2 = h * h;
    let raw: Vec<f64> = (1..=m)
        .map(|j| {
            let jf = j as f64;
            let weight = if j < m { 2.0 * jf } else { jf };
            weight * h2 * pdf_deriv(jf * h).abs()
        })
        .collect();
    let total = neumaier_sum(raw.iter().copied());
    if !(total > 0.0) {
        return Err(Error::invalid(
            "h",
            format!("all weights underflow for m = {m}, h = {h}"),
        ));
    }
    let normalized = raw.iter().map(|r| r / total).collect();
    Ok(CoefficientTable {
        m,
        h,
        raw,
        total,
        normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_weight() {
        let t = mixing_coefficients(1, 0.5).unwrap();
        assert_eq!(t.normalized, vec![1.0]);
        assert_eq!(t.half_width(), 0.5);
    }

    #[test]
    fn two_term_table() {
        let t = mixing_coefficients(2, 1.0).unwrap();
        assert!(close(t.raw[0], 0.48394145, 1e-8));
        assert!(close(t.raw[1], 0.21596387, 1e-8));
        assert!(close(t.total, 0.69990532, 1e-8));
        assert!(close(t.normalized[0], 0.691438, 1e-6));
        assert!(close(t.normalized[1], 0.308562, 1e-6));
        assert!(close(t.variance_factor(), 0.501889692631896731, 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(mixing_coefficients(0, 1.0).is_err());
        assert!(mixing_coefficients(3, 0.0).is_err());
        assert!(mixing_coefficients(3, -1.0).is_err());
        assert!(mixing_coefficients(3, f64::NAN).is_err());
    }

    #[test]
    fn normalization_grid() {
        for m in 1..=64 {
            for h in [0.05, 0.1, 0.5, 1.0, 3.0] {
                let t = mixing_coefficients(m, h).unwrap();
                let s: f64 = neumaier_sum(t.normalized.iter().copied());
                assert!((s - 1.0).abs() <= 1e-12, "m={m} h={h}");
                // φ′(t) underflows to zero once t exceeds ~38
                for (j, &r) in t.raw.iter().enumerate() {
                    assert!(r > 0.0 || (j + 1) as f64 * h > 37.0, "m={m} h={h} j={}", j + 1);
                }
                assert_eq!(t.total, neumaier_sum(t.raw.iter().copied()));
            }
        }
        let t = mixing_coefficients(5, 0.6).unwrap();
        assert!((t.normalized.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sum_of_squares_below_one() {
        for m in 2..=64 {
            for h in [0.05, 0.1, 0.5, 1.0] {
                let t = mixing_coefficients(m, h).unwrap();
                let sq: f64 = t.normalized.iter().map(|a| a * a).sum();
                assert!(sq < 1.0);
                assert!(t.variance_factor() < 1.0);
            }
        }
        assert_eq!(mixing_coefficients(1, 0.7).unwrap().variance_factor(), 1.0);
    }

    #[test]
    fn total_is_bounded_with_fixed_half_width() {
        let reference = |s: f64| 2.0 * s / (2.0 * std::f64::consts::PI).sqrt() * (1.0 - (-s * s / 2.0).exp());
        for s in [1.0, 2.0, 3.0] {
            let totals: Vec<f64> = [4, 8, 16, 32, 64]
                .iter()
                .map(|&m| mixing_coefficients(m, s / m as f64).unwrap().total)
                .collect();
            let (lo, hi) = totals
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
            assert!(hi / lo < 2.0, "S={s}");
            // C never exceeds 2S·∫₀ˢ|φ′|
            assert!(hi <= reference(s), "S={s}");
            if s <= 2.0 {
                assert!(lo >= reference(s) / 2.0, "S={s}");
            }
        }
    }

    proptest! {
        #[test]
        fn normalized_weights_are_a_convex_combination(m in 1usize..200, s in 0.01f64..30.0) {
            let h = s / m as f64;
            let t = mixing_coefficients(m, h).unwrap();
            prop_assert!(t.normalized.iter().all(|&a| a > 0.0 && a <= 1.0));
            prop_assert!((t.normalized.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (a, r) in t.normalized.iter().zip(&t.raw) {
                prop_assert_eq!(*a, r / t.total);
            }
        }
    }
}
