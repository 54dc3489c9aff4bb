use gradmix::estimators::cfd;
use gradmix::experiment::bench::{median, ETA_FLOOR};
use gradmix::experiment::{
    bfgs_minimize, emit_table, extract_buckets, relative_error, run_benchmark, run_benchmark_jobs,
    run_noisy_benchmark, run_noisy_benchmark_jobs, BenchConfig, Format,
};
use gradmix::streams::derive_seed;
use gradmix::testfns::{lookup, perturbed_start};
use gradmix::{noisy_wrap, Exact, NoiseSpec, Scheme};

#[test]
fn cells_match_a_hand_loop() {
    let mut cfg = BenchConfig::noise_free(1e-2, &[Scheme::Cfd]);
    cfg.suite = vec!["beale".into(), "trig_sum".into()];
    let report = run_benchmark(&cfg).unwrap();
    let row = report.row(Scheme::Cfd, 1).unwrap();

    let mut per_bucket: Vec<Vec<f64>> = vec![Vec::new(); cfg.alphas.len()];
    for name in &cfg.suite {
        let f = lookup(name, None).unwrap();
        let start = perturbed_start(f.as_ref(), cfg.seed, cfg.perturb);
        let traj = bfgs_minimize(f.as_ref(), &start, cfg.grad_tol, cfg.max_iter).unwrap();
        let buckets = extract_buckets(&traj.points, f.as_ref(), &cfg.alphas).unwrap();
        for (b, p) in buckets.points.iter().enumerate() {
            let Some(p) = p else { continue };
            let g = cfd(&mut Exact(f.as_ref()), &p.point, cfg.sigma, cfg.h).unwrap();
            let eta = relative_error(&g.vector, &f.gradient(&p.point).unwrap()).unwrap();
            per_bucket[b].push(eta.max(ETA_FLOOR).log10());
        }
    }
    for (b, logs) in per_bucket.iter_mut().enumerate() {
        let expected = median(logs);
        assert_eq!(row.cells[b].samples, logs.len());
        match (row.cells[b].median, expected) {
            (Some(a), Some(e)) => assert!((a - e).abs() <= 1e-12, "bucket {b}: {a} vs {e}"),
            (a, e) => assert_eq!(a, e, "bucket {b}"),
        }
    }
}

#[test]
fn zero_noise_single_realization_is_the_noise_free_run() {
    let schemes = [Scheme::Cfd, Scheme::Gsg, Scheme::Nmxfd];
    let mut a = BenchConfig::noise_free(1e-3, &schemes);
    a.suite = vec!["rosenbrock".into(), "himmelblau".into(), "wood".into()];
    let mut b = a.clone();
    b.lambda = 0.0;
    b.realizations = 1;
    let plain = run_benchmark(&a).unwrap();
    let noisy = run_noisy_benchmark(&b).unwrap();
    assert_eq!(plain.rows, noisy.rows);
    assert_eq!(plain.samples, noisy.samples);
}

#[test]
fn noisy_mean_eta_matches_monte_carlo() {
    let mut cfg = BenchConfig::noisy(1e-2, 1e-3, &[Scheme::Cfd]);
    cfg.suite = vec!["sphere".into()];
    let report = run_noisy_benchmark(&cfg).unwrap();
    let sample = report
        .samples
        .iter()
        .find(|s| s.bucket == 0 && s.scheme == Scheme::Cfd)
        .unwrap();
    let bench_eta = sample.eta.unwrap();

    let f = lookup("sphere", None).unwrap();
    let x = f.start();
    let truth = f.gradient(&x).unwrap();
    let trials = 10_000;
    let mut total = 0.0;
    for k in 0..trials {
        let mut noisy = noisy_wrap(f.as_ref(), NoiseSpec::new(1e-3, derive_seed(0xC0FFEE, &[k])).unwrap()).unwrap();
        let g = cfd(&mut noisy, &x, 1e-2, 1.0).unwrap();
        total += relative_error(&g.vector, &truth).unwrap();
    }
    let oracle = total / trials as f64;
    assert!((bench_eta / oracle - 1.0).abs() <= 0.10, "bench {bench_eta} vs oracle {oracle}");
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let mut cfg = BenchConfig::noisy(1e-2, 1e-3, &[Scheme::Gsg, Scheme::Cgsg, Scheme::Nmxfd]);
    cfg.realizations = 5;
    cfg.perturb = 0.1;
    cfg.seed = 11;
    let one = emit_table(&run_noisy_benchmark_jobs(&cfg, Some(1)).unwrap(), Format::Json);
    let many = emit_table(&run_noisy_benchmark_jobs(&cfg, Some(6)).unwrap(), Format::Json);
    assert_eq!(one, many);

    let cfg = BenchConfig::noise_free(1e-4, &[Scheme::Ffd, Scheme::Gsg]);
    assert_eq!(run_benchmark_jobs(&cfg, Some(1)).unwrap(), run_benchmark_jobs(&cfg, Some(3)).unwrap());
}

#[test]
fn seeds_change_sampled_schemes_only() {
    let mut a = BenchConfig::noise_free(1e-2, &[Scheme::Cfd, Scheme::Gsg]);
    a.suite = vec!["beale".into(), "exp_quadratic".into()];
    let mut b = a.clone();
    b.seed = 99;
    let (ra, rb) = (run_benchmark(&a).unwrap(), run_benchmark(&b).unwrap());
    assert_eq!(ra.row(Scheme::Cfd, 1), rb.row(Scheme::Cfd, 1));
    assert_ne!(ra.row(Scheme::Gsg, 2), rb.row(Scheme::Gsg, 2));
}

#[test]
fn every_suite_function_is_bucketed() {
    let cfg = BenchConfig::noise_free(1e-2, &[Scheme::Cfd]);
    let report = run_benchmark(&cfg).unwrap();
    assert!(report.functions.len() >= 12);
    for f in &report.functions {
        assert!(f.excluded.is_none(), "{}", f.name);
        assert!(f.converged, "{} did not converge", f.name);
        assert_eq!(f.bucket_indices[0], Some(0));
        let idx: Vec<usize> = f.bucket_indices.iter().flatten().copied().collect();
        assert!(idx.windows(2).all(|w| w[0] <= w[1]), "{}: {idx:?}", f.name);
    }
    assert_eq!(report.failures(), 0);
}
