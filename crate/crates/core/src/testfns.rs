//! Built-in smooth test objectives with analytic gradients.
//!
//! | name | n | L | H | start |
//! |------|---|---|---|-------|
//! | sphere | any (4) | 2 | 0 | (1, -2, 3, -4, …) |
//! | ill_quadratic | 4 | 1000 | 0 | (1, 1, 1, 1) |
//! | scaled_quadratic | 3 | 3+√3 | 0 | (2, 2, 2) |
//! | cubic_valley | any (3) | – | 6 | (1.5, -1, 2, …) |
//! | rosenbrock | any (2) | – | – | (-1.2, 1, -1.2, …) |
//! | rosenbrock10 | 10 | – | – | (-1.2, 1, …) |
//! | powell_singular | 4 | – | – | (3, -1, 0, 1) |
//! | wood | 4 | – | – | (-3, -1, -3, -1) |
//! | beale | 2 | – | – | (1, 1) |
//! | trig_sum | any (3) | 1 + n/10 | 1 | (1, -0.5, 2, …) |
//! | exp_quadratic | any (3) | – | – | (1, -1, 0.5, …) |
//! | log_sum_exp | 3 | 5.1 | – | (1, 1, 1) |
//! | himmelblau | 2 | – | – | (0, 0) |
//!
//! `cubic` (`Σ x_i³`, H = 6) is available by name but is unbounded below and so is not
//! part of the benchmark suite.

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::streams;
use rand::Rng;

fn cycle(pattern: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| pattern[i % pattern.len()]).collect()
}

pub struct Sphere {
    n: usize,
}

impl Objective for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|v| 2.0 * v).collect())
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        Some(2.0)
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        Some(0.0)
    }
    fn start(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let v = (i + 1) as f64;
                if i % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }
}

/// `½ Σ c_i x_i²` with `c_i = 10^{3i/(n-1)}`.
pub struct IllQuadratic {
    scales: Vec<f64>,
}

impl IllQuadratic {
    fn new(n: usize) -> Self {
        let scales = (0..n)
            .map(|i| {
                if n == 1 {
                    1.0
                } else {
                    10f64.powf(3.0 * i as f64 / (n - 1) as f64)
                }
            })
            .collect();
        Self { scales }
    }
}

impl Objective for IllQuadratic {
    fn name(&self) -> &str {
        "ill_quadratic"
    }
    fn dim(&self) -> usize {
        self.scales.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&self.scales).map(|(v, c)| c * v * v).sum::<f64>()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.scales).map(|(v, c)| c * v).collect())
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        self.scales.iter().copied().reduce(f64::max)
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `½ xᵀAx + bᵀx` with a fixed tridiagonal SPD `A` whose largest eigenvalue is `3 + √3`.
pub struct ScaledQuadratic;

const SQ_A: [[f64; 3]; 3] = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
const SQ_B: [f64; 3] = [1.0, -1.0, 0.5];

impl Objective for ScaledQuadratic {
    fn name(&self) -> &str {
        "scaled_quadratic"
    }
    fn dim(&self) -> usize {
        3
    }
    fn value(&self, x: &[f64]) -> f64 {
        let mut f = 0.0;
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| SQ_A[i][j] * x[j]).sum();
            f += 0.5 * x[i] * ax + SQ_B[i] * x[i];
        }
        f
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(
            (0..3)
                .map(|i| (0..3).map(|j| SQ_A[i][j] * x[j]).sum::<f64>() + SQ_B[i])
                .collect(),
        )
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        Some(3.0 + 3f64.sqrt())
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        Some(0.0)
    }
    fn start(&self) -> Vec<f64> {
        vec![2.0; 3]
    }
}

/// `Σ |x_i|³ + x_i²`: Hessian `diag(6|x_i| + 2)` is 6-Lipschitz.
pub struct CubicValley {
    n: usize,
}

impl Objective for CubicValley {
    fn name(&self) -> &str {
        "cubic_valley"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.abs().powi(3) + v * v).sum()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|v| 3.0 * v * v.abs() + 2.0 * v).collect())
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        Some(6.0)
    }
    fn start(&self) -> Vec<f64> {
        cycle(&[1.5, -1.0, 2.0], self.n)
    }
}

/// `Σ x_i³`. Hessian `diag(6x_i)` is 6-Lipschitz; central differences have error exactly `t²`.
pub struct CubicSum {
    n: usize,
}

impl CubicSum {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Objective for CubicSum {
    fn name(&self) -> &str {
        "cubic"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v * v).sum()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|v| 3.0 * v * v).collect())
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        Some(6.0)
    }
}

/// Extended (chained) Rosenbrock.
pub struct Rosenbrock {
    n: usize,
    name: &'static str,
}

impl Objective for Rosenbrock {
    fn name(&self) -> &str {
        self.name
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        for i in 0..self.n.saturating_sub(1) {
            let r = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * r;
        }
        Some(g)
    }
    fn start(&self) -> Vec<f64> {
        cycle(&[-1.2, 1.0], self.n)
    }
}

pub struct PowellSingular;

impl Objective for PowellSingular {
    fn name(&self) -> &str {
        "powell_singular"
    }
    fn dim(&self) -> usize {
        4
    }
    fn value(&self, x: &[f64]) -> f64 {
        (x[0] + 10.0 * x[1]).powi(2)
            + 5.0 * (x[2] - x[3]).powi(2)
            + (x[1] - 2.0 * x[2]).powi(4)
            + 10.0 * (x[0] - x[3]).powi(4)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let a = x[0] + 10.0 * x[1];
        let b = x[2] - x[3];
        let c = (x[1] - 2.0 * x[2]).powi(3);
        let d = (x[0] - x[3]).powi(3);
        Some(vec![
            2.0 * a + 40.0 * d,
            20.0 * a + 4.0 * c,
            10.0 * b - 8.0 * c,
            -10.0 * b - 40.0 * d,
        ])
    }
    fn start(&self) -> Vec<f64> {
        vec![3.0, -1.0, 0.0, 1.0]
    }
}

pub struct Wood;

impl Objective for Wood {
    fn name(&self) -> &str {
        "wood"
    }
    fn dim(&self) -> usize {
        4
    }
    fn value(&self, x: &[f64]) -> f64 {
        100.0 * (x[1] - x[0] * x[0]).powi(2)
            + (1.0 - x[0]).powi(2)
            + 90.0 * (x[3] - x[2] * x[2]).powi(2)
            + (1.0 - x[2]).powi(2)
            + 10.1 * ((x[1] - 1.0).powi(2) + (x[3] - 1.0).powi(2))
            + 19.8 * (x[1] - 1.0) * (x[3] - 1.0)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r1 = x[1] - x[0] * x[0];
        let r2 = x[3] - x[2] * x[2];
        Some(vec![
            -400.0 * x[0] * r1 - 2.0 * (1.0 - x[0]),
            200.0 * r1 + 20.2 * (x[1] - 1.0) + 19.8 * (x[3] - 1.0),
            -360.0 * x[2] * r2 - 2.0 * (1.0 - x[2]),
            180.0 * r2 + 20.2 * (x[3] - 1.0) + 19.8 * (x[1] - 1.0),
        ])
    }
    fn start(&self) -> Vec<f64> {
        vec![-3.0, -1.0, -3.0, -1.0]
    }
}

pub struct Beale;

impl Objective for Beale {
    fn name(&self) -> &str {
        "beale"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        (1.5 - a + a * b).powi(2) + (2.25 - a + a * b * b).powi(2) + (2.625 - a + a * b.powi(3)).powi(2)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (a, b) = (x[0], x[1]);
        let t1 = 1.5 - a + a * b;
        let t2 = 2.25 - a + a * b * b;
        let t3 = 2.625 - a + a * b.powi(3);
        Some(vec![
            2.0 * t1 * (b - 1.0) + 2.0 * t2 * (b * b - 1.0) + 2.0 * t3 * (b.powi(3) - 1.0),
            2.0 * t1 * a + 4.0 * t2 * a * b + 6.0 * t3 * a * b * b,
        ])
    }
    fn start(&self) -> Vec<f64> {
        vec![1.0, 1.0]
    }
    fn domain(&self) -> (f64, f64) {
        (-4.5, 4.5)
    }
}

/// `Σ (1 − cos x_i) + 0.05 (Σ x_i)²`.
pub struct TrigSum {
    n: usize,
}

impl Objective for TrigSum {
    fn name(&self) -> &str {
        "trig_sum"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().sum();
        x.iter().map(|v| 1.0 - v.cos()).sum::<f64>() + 0.05 * s * s
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s: f64 = x.iter().sum();
        Some(x.iter().map(|v| v.sin() + 0.1 * s).collect())
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        Some(1.0 + 0.1 * self.n as f64)
    }
    fn lipschitz_hess(&self) -> Option<f64> {
        Some(1.0)
    }
    fn start(&self) -> Vec<f64> {
        cycle(&[1.0, -0.5, 2.0], self.n)
    }
}

/// `Σ (e^{x_i} − x_i) + ½‖x‖²`.
pub struct ExpQuadratic {
    n: usize,
}

impl Objective for ExpQuadratic {
    fn name(&self) -> &str {
        "exp_quadratic"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.exp() - v + 0.5 * v * v).sum()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|v| v.exp() - 1.0 + v).collect())
    }
    fn start(&self) -> Vec<f64> {
        cycle(&[1.0, -1.0, 0.5], self.n)
    }
}

/// `log Σ_k exp(a_kᵀx + b_k) + ½μ‖x‖²` with four fixed affine pieces.
pub struct LogSumExp;

const LSE_A: [[f64; 3]; 4] = [
    [1.0, 2.0, 0.0],
    [-1.0, 0.0, 1.0],
    [0.0, -1.0, -2.0],
    [0.5, 0.5, 0.5],
];
const LSE_B: [f64; 4] = [0.1, -0.2, 0.3, 0.0];
const LSE_MU: f64 = 0.1;

impl LogSumExp {
    fn logits(x: &[f64]) -> [f64; 4] {
        let mut z = [0.0; 4];
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = LSE_B[k] + (0..3).map(|j| LSE_A[k][j] * x[j]).sum::<f64>();
        }
        z
    }
}

impl Objective for LogSumExp {
    fn name(&self) -> &str {
        "log_sum_exp"
    }
    fn dim(&self) -> usize {
        3
    }
    fn value(&self, x: &[f64]) -> f64 {
        let z = Self::logits(x);
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = zmax + z.iter().map(|v| (v - zmax).exp()).sum::<f64>().ln();
        lse + 0.5 * LSE_MU * x.iter().map(|v| v * v).sum::<f64>()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let z = Self::logits(x);
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
        let total: f64 = w.iter().sum();
        Some(
            (0..3)
                .map(|j| {
                    (0..4).map(|k| w[k] * LSE_A[k][j]).sum::<f64>() / total + LSE_MU * x[j]
                })
                .collect(),
        )
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        Some(5.0 + LSE_MU)
    }
    fn start(&self) -> Vec<f64> {
        vec![1.0; 3]
    }
}

pub struct Himmelblau;

impl Objective for Himmelblau {
    fn name(&self) -> &str {
        "himmelblau"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        (x[0] * x[0] + x[1] - 11.0).powi(2) + (x[0] + x[1] * x[1] - 7.0).powi(2)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let a = x[0] * x[0] + x[1] - 11.0;
        let b = x[0] + x[1] * x[1] - 7.0;
        Some(vec![4.0 * x[0] * a + 2.0 * b, 2.0 * a + 4.0 * x[1] * b])
    }
    fn start(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
}

/// Registry entry. Variable-dimension families accept any `n >= min_dim`.
#[derive(Clone, Copy)]
pub struct Entry {
    pub name: &'static str,
    pub default_dim: usize,
    pub variable_dim: bool,
    pub min_dim: usize,
    pub in_suite: bool,
    build: fn(usize) -> Box<dyn Objective>,
}

impl Entry {
    pub fn build(&self, dim: Option<usize>) -> Result<Box<dyn Objective>> {
        let n = dim.unwrap_or(self.default_dim);
        if n != self.default_dim && !self.variable_dim {
            return Err(Error::DimensionMismatch {
                expected: self.default_dim,
                got: n,
            });
        }
        if n < self.min_dim {
            return Err(Error::invalid("dim", format!("`{}` needs n >= {}", self.name, self.min_dim)));
        }
        Ok((self.build)(n))
    }
}

const fn entry(
    name: &'static str,
    default_dim: usize,
    variable_dim: bool,
    in_suite: bool,
    build: fn(usize) -> Box<dyn Objective>,
) -> Entry {
    Entry {
        name,
        default_dim,
        variable_dim,
        min_dim: 1,
        in_suite,
        build,
    }
}

pub fn catalog() -> Vec<Entry> {
    let mut rosen = entry("rosenbrock", 2, true, true, |n| {
        Box::new(Rosenbrock { n, name: "rosenbrock" })
    });
    rosen.min_dim = 2;
    vec![
        entry("sphere", 4, true, true, |n| Box::new(Sphere { n })),
        entry("ill_quadratic", 4, true, true, |n| Box::new(IllQuadratic::new(n))),
        entry("scaled_quadratic", 3, false, true, |_| Box::new(ScaledQuadratic)),
        entry("cubic_valley", 3, true, true, |n| Box::new(CubicValley { n })),
        rosen,
        entry("rosenbrock10", 10, false, true, |n| {
            Box::new(Rosenbrock { n, name: "rosenbrock10" })
        }),
        entry("powell_singular", 4, false, true, |_| Box::new(PowellSingular)),
        entry("wood", 4, false, true, |_| Box::new(Wood)),
        entry("beale", 2, false, true, |_| Box::new(Beale)),
        entry("trig_sum", 3, true, true, |n| Box::new(TrigSum { n })),
        entry("exp_quadratic", 3, true, true, |n| Box::new(ExpQuadratic { n })),
        entry("log_sum_exp", 3, false, true, |_| Box::new(LogSumExp)),
        entry("himmelblau", 2, false, true, |_| Box::new(Himmelblau)),
        entry("cubic", 3, true, false, |n| Box::new(CubicSum { n })),
    ]
}

/// The benchmark suite at default dimensions.
pub fn registry() -> Vec<Box<dyn Objective>> {
    catalog()
        .iter()
        .filter(|e| e.in_suite)
        .map(|e| (e.build)(e.default_dim))
        .collect()
}

pub fn lookup(name: &str, dim: Option<usize>) -> Result<Box<dyn Objective>> {
    let cat = catalog();
    match cat.iter().find(|e| e.name == name) {
        Some(e) => e.build(dim),
        None => Err(Error::UnknownObjective {
            name: name.to_string(),
            valid: cat.iter().map(|e| e.name.to_string()).collect(),
        }),
    }
}

/// Resolves a suite spec: `["all"]` or a list of names.
pub fn suite(names: &[String]) -> Result<Vec<Box<dyn Objective>>> {
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(registry());
    }
    names.iter().map(|n| lookup(n, None)).collect()
}

/// `x⁰ + u` with `u_i ~ U(-scale, scale)` drawn from a stream keyed by `(seed, name)`.
pub fn perturbed_start(f: &dyn Objective, seed: u64, scale: f64) -> Vec<f64> {
    let mut x = f.start();
    if scale > 0.0 {
        let mut rng = streams::rng(streams::derive_seed(seed, &[streams::label_id(f.name())]));
        for v in &mut x {
            *v += rng.random_range(-scale..=scale);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::norm2;

    /// Fourth-order central difference of the value, independent of the analytic gradient.
    fn probe(f: &dyn Objective, x: &[f64], step: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let at = |t: f64| {
                    let mut y = x.to_vec();
                    y[i] += t;
                    f.value(&y)
                };
                (-at(2.0 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2.0 * step)) / (12.0 * step)
            })
            .collect()
    }

    fn sample_points(f: &dyn Objective, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let (lo, hi) = f.domain();
        let mut rng = streams::rng(streams::derive_seed(seed, &[streams::label_id(f.name())]));
        (0..count)
            .map(|_| (0..f.dim()).map(|_| rng.random_range(lo * 0.5..hi * 0.5)).collect())
            .collect()
    }

    #[test]
    fn registry_contents() {
        let r = registry();
        assert!(r.len() >= 12);
        let names: Vec<&str> = r.iter().map(|f| f.name()).collect();
        for want in ["sphere", "rosenbrock", "rosenbrock10", "powell_singular", "wood", "beale", "himmelblau"] {
            assert!(names.contains(&want), "{want}");
        }
        assert!(r.iter().all(|f| f.dim() >= 1 && f.start().len() == f.dim()));
    }

    #[test]
    fn known_points() {
        let rb = lookup("rosenbrock", None).unwrap();
        assert_eq!(rb.value(&[1.0, 1.0]), 0.0);
        assert_eq!(rb.gradient(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        let rb10 = lookup("rosenbrock10", None).unwrap();
        assert_eq!(rb10.gradient(&[1.0; 10]).unwrap(), vec![0.0; 10]);
        let sp = lookup("sphere", Some(2)).unwrap();
        assert_eq!(sp.gradient(&[3.0, -4.0]).unwrap(), vec![6.0, -8.0]);
        let hb = lookup("himmelblau", None).unwrap();
        assert_eq!(hb.value(&[3.0, 2.0]), 0.0);
        let beale = lookup("beale", None).unwrap();
        assert!(beale.value(&[3.0, 0.5]).abs() < 1e-15);
        let wood = lookup("wood", None).unwrap();
        assert_eq!(wood.gradient(&[1.0; 4]).unwrap(), vec![0.0; 4]);
        let powell = lookup("powell_singular", None).unwrap();
        assert_eq!(powell.gradient(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn lookup_errors() {
        match lookup("nope", None) {
            Err(Error::UnknownObjective { valid, .. }) => assert!(valid.contains(&"wood".to_string())),
            other => panic!("unexpected {other:?}"),
        }
        assert!(lookup("wood", Some(3)).is_err());
        assert!(lookup("rosenbrock", Some(1)).is_err());
        assert_eq!(lookup("rosenbrock", Some(5)).unwrap().dim(), 5);
    }

    #[test]
    fn gradients_match_finite_difference_probe() {
        let mut all = registry();
        all.push(lookup("cubic", None).unwrap());
        for f in &all {
            for x in sample_points(f.as_ref(), 20, 2024) {
                let g = f.gradient(&x).unwrap();
                let p = probe(f.as_ref(), &x, 1e-4);
                let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
                let dev = g.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
                assert!(dev < 1e-6, "{} at {x:?}: {dev}", f.name());
            }
        }
    }

    #[test]
    fn central_probe_matches_at_seeded_points() {
        // second-order probe with step 1e-5
        for f in &registry() {
            for x in sample_points(f.as_ref(), 20, 7) {
                let g = f.gradient(&x).unwrap();
                let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
                for i in 0..x.len() {
                    let (mut a, mut b) = (x.clone(), x.clone());
                    a[i] += 1e-5;
                    b[i] -= 1e-5;
                    let d = (f.value(&a) - f.value(&b)) / 2e-5;
                    assert!((d - g[i]).abs() / scale < 1e-6, "{} i={i}", f.name());
                }
            }
        }
    }

    #[test]
    fn declared_hessian_constants_bound_central_differences() {
        let mut all = registry();
        all.push(lookup("cubic", None).unwrap());
        for f in all.iter().filter(|f| f.lipschitz_hess().is_some()) {
            let big_h = f.lipschitz_hess().unwrap();
            for x in sample_points(f.as_ref(), 10, 99) {
                let g = f.gradient(&x).unwrap();
                for t in [1e-1, 3e-2, 1e-2] {
                    for i in 0..x.len() {
                        let (mut a, mut b) = (x.clone(), x.clone());
                        a[i] += t;
                        b[i] -= t;
                        let d = (f.value(&a) - f.value(&b)) / (2.0 * t);
                        let roundoff = 1e3 * f64::EPSILON * (1.0 + f.value(&x).abs()) / t;
                        assert!((d - g[i]).abs() <= big_h * t * t / 6.0 * (1.0 + 1e-9) + roundoff, "{}", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn finite_on_domain() {
        for f in &registry() {
            let (lo, hi) = f.domain();
            let mut rng = streams::rng(5);
            for _ in 0..200 {
                let x: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(lo..=hi)).collect();
                assert!(f.value(&x).is_finite(), "{}", f.name());
                assert!(f.gradient(&x).unwrap().iter().all(|v| v.is_finite()));
            }
            let corner = vec![hi; f.dim()];
            assert!(f.value(&corner).is_finite());
        }
    }

    #[test]
    fn starts_are_not_stationary() {
        for f in &registry() {
            let g = f.gradient(&f.start()).unwrap();
            assert!(norm2(&g) > 0.0, "{}", f.name());
        }
    }

    #[test]
    fn perturbation_is_seeded() {
        let f = lookup("wood", None).unwrap();
        assert_eq!(perturbed_start(f.as_ref(), 1, 0.0), f.start());
        let a = perturbed_start(f.as_ref(), 1, 0.1);
        assert_eq!(a, perturbed_start(f.as_ref(), 1, 0.1));
        assert_ne!(a, perturbed_start(f.as_ref(), 2, 0.1));
        assert!(a.iter().zip(f.start()).all(|(p, s)| (p - s).abs() <= 0.1));
    }
}
