use gradmix::estimators::{mxfd_unnormalized, nmxfd};
use gradmix::oracles::{
    filtered_derivative_oracle, smoothed_gradient_oracle, SmoothingAccuracy, TRUNCATION,
};
use gradmix::testfns::lookup;
use gradmix::{mixing_coefficients, Exact};

#[test]
fn filtered_derivative_converges_monotonically() {
    for (name, x) in [
        ("beale", vec![1.0, 0.5]),
        ("trig_sum", vec![0.4, -1.1, 2.0]),
        ("exp_quadratic", vec![0.3, -0.2, 0.6]),
    ] {
        let f = lookup(name, None).unwrap();
        let truth = f.gradient(&x).unwrap();
        for i in 0..x.len() {
            let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&s| (filtered_derivative_oracle(f.as_ref(), &x, i, s, TRUNCATION, 1e-12).unwrap() - truth[i]).abs())
                .collect();
            assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{name}[{i}]: {gaps:?}");
            assert!(gaps[3] <= 1e-5 * gaps[0] + 1e-10, "{name}[{i}]: {gaps:?}");
        }
    }
}

#[test]
fn raw_trapezoid_is_total_times_normalized() {
    let f = lookup("rosenbrock", Some(2)).unwrap();
    let x = [-1.2, 1.0];
    let (sigma, m, h) = (1e-3, 8, 0.375);
    let c = mixing_coefficients(m, h).unwrap().total;
    let raw = mxfd_unnormalized(&mut Exact(f.as_ref()), &x, sigma, m, h).unwrap().vector;
    let nmx = nmxfd(&mut Exact(f.as_ref()), &x, sigma, m, h).unwrap().vector;
    for (r, n) in raw.iter().zip(&nmx) {
        assert!((r - c * n).abs() <= 1e-12 * r.abs(), "{r} vs {}", c * n);
    }
}

#[test]
fn truncated_raw_trapezoid_approaches_its_integral() {
    let f = lookup("exp_quadratic", Some(3)).unwrap();
    let x = [0.2, -0.1, 0.4];
    let (sigma, s, m) = (0.1, 3.0, 256);
    let raw = mxfd_unnormalized(&mut Exact(f.as_ref()), &x, sigma, m, s / m as f64).unwrap().vector;
    for (i, r) in raw.iter().enumerate() {
        let q = filtered_derivative_oracle(f.as_ref(), &x, i, sigma, s, 1e-13).unwrap();
        assert!((r - q).abs() < 1e-5 * q.abs().max(1.0), "{i}: {r} vs {q}");
    }
}

#[test]
fn monte_carlo_agrees_with_tensor_quadrature() {
    let f = lookup("himmelblau", None).unwrap();
    let x = [0.5, -1.0];
    let sigma = 0.2;
    let tensor = smoothed_gradient_oracle(f.as_ref(), &x, sigma, SmoothingAccuracy::Tensor { tol: 1e-8 }).unwrap();
    let mc = smoothed_gradient_oracle(f.as_ref(), &x, sigma, SmoothingAccuracy::MonteCarlo { samples: 200_000, seed: 3 }).unwrap();
    let se = mc.std_error.unwrap();
    for i in 0..2 {
        assert!((tensor.value[i] - mc.value[i]).abs() <= 4.0 * se[i], "{i}: {} vs {} ± {}", tensor.value[i], mc.value[i], se[i]);
    }
    assert_eq!(mc.evaluations, 400_000);
}
