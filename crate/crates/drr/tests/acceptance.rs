//! Acceptance suite: desk-scale replicas of the headline experiments plus
//! the cross-module property gates. Each test prints one PASS/FAIL line.
//!
//! Timing-sensitive criteria share a lock so wall-clock measurements never
//! run concurrently with heavy compute from a sibling test.

use std::sync::{Mutex, MutexGuard};

use drr::basis::{
    basis_eval, choose_truncation, enumerate_index_set, estimate_coefficients, l2_distance,
    quadrature_l2, BasisConfig,
};
use drr::bench::{noop_per_query, run_bench, BenchReport};
use drr::baselines::{
    dirichlet_log_likelihood_gradient, dirichlet_mle, em_fit, mean_log_statistics, EmOptions,
};
use drr::config::{ConfigBuilder, ExperimentConfig};
use drr::quad::trapezoid;
use drr::regress::{kk_fit, kk_predict, predict, solve_normal_equations, KernelKind};
use drr::rks::{apply_features, draw_feature_map, exact_rbf_kernel};
use drr::rng::{derived_rng, rng_from_seed, stream};
use drr::sample::SampleSet;
use drr::synth::{
    draw_trunc_gauss_mixture, sample_dirichlet_points, sample_trunc_gauss_mixture,
    DirichletSpec, TruncGaussComponent, TruncGaussMixture,
};
use drr::DEFAULT_SEED;
use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion}: {verdict} - {detail}");
}

fn build_config(assignments: &[(&str, &str)]) -> ExperimentConfig {
    let mut b = ConfigBuilder::new();
    for (k, v) in assignments {
        b.set(k, v).unwrap_or_else(|e| panic!("config key {k}: {e}"));
    }
    b.finish().expect("valid acceptance config")
}

fn row<'r>(report: &'r BenchReport, method: &str) -> &'r drr::bench::BenchRow {
    report
        .rows
        .iter()
        .find(|r| r.method == method)
        .unwrap_or_else(|| panic!("missing {method} row"))
}

fn synthetic_map_config(seed: u64, train: usize, test: usize) -> ExperimentConfig {
    build_config(&[
        ("experiment", "synthetic-map"),
        ("seed", &seed.to_string()),
        ("train_size", &train.to_string()),
        ("test_size", &test.to_string()),
        ("points_per_set", "auto"),
        ("grid_t", "3.5"),
        ("grid_d", "768"),
        ("grid_sigma", "1"),
        ("grid_lambda", "0.000001"),
        ("grid_sigma_kk", "0.5"),
    ])
}

/// Criterion 1: kernel-kernel per-query time grows at least 5x from N = 1e3
/// to N = 1e4 while double-basis grows at most 1.5x and stays at least 3x
/// faster at N = 1e4.
///
/// The four predictors are timed in interleaved rounds so that scheduler and
/// frequency jitter hits them all alike and cancels out of the ratios.
#[test]
fn criterion_1_evaluation_time_scaling() {
    let _guard = serial();
    use drr::bench::{basis_from_config, fit_bb, fit_kk};
    use drr::dataset::{build_dataset, Split, SynthSpec};

    let mut predictors = Vec::new();
    let mut test_sets = Vec::new();
    for &train_size in &[1_000usize, 10_000] {
        let cfg = synthetic_map_config(DEFAULT_SEED, train_size, 150);
        let n_points = cfg.resolved_points(train_size);
        let spec = |num_sets: usize| SynthSpec {
            kind: cfg.experiment,
            seed: cfg.seed,
            num_sets,
            points_per_set: n_points,
            dirichlet_dim: cfg.dirichlet_dim,
            noise_std: 0.0,
        };
        let train = build_dataset(&spec(train_size), Split::Train).unwrap();
        let test = build_dataset(&spec(150), Split::Test).unwrap();
        let basis = basis_from_config(&cfg).unwrap();
        predictors.push(fit_bb(&cfg, &basis, &train).unwrap().model);
        predictors.push(fit_kk(&cfg, &basis, &train).unwrap().model);
        test_sets.push(test);
    }
    let queries = |which: usize, q: usize| -> &SampleSet {
        let test = &test_sets[which / 2];
        &test.instances[q % test.instances.len()].samples
    };

    // Interleaved rounds: per round, a per-method median over a short burst;
    // the reported figure is the median across rounds.
    let rounds = 9;
    let burst = 40;
    for m in 0..4 {
        for q in 0..10 {
            let _ = predictors[m].predict_all(queries(m, q), false).unwrap();
        }
    }
    let mut per_round = vec![Vec::new(); 4];
    for round in 0..rounds {
        for m in 0..4 {
            let mut times = Vec::with_capacity(burst);
            for q in 0..burst {
                let s = queries(m, round * burst + q);
                let start = std::time::Instant::now();
                std::hint::black_box(predictors[m].predict_all(s, false).unwrap());
                times.push(start.elapsed().as_secs_f64());
            }
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            per_round[m].push(times[burst / 2]);
        }
    }
    let med = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let bb_small = med(&mut per_round[0]);
    let kk_small = med(&mut per_round[1]);
    let bb_large = med(&mut per_round[2]);
    let kk_large = med(&mut per_round[3]);

    let kk_growth = kk_large / kk_small;
    let bb_growth = bb_large / bb_small;
    let advantage = kk_large / bb_large;

    // Harness overhead check rides along here: point sets of 252 points are
    // comfortably past the n >= 200 regime the contract names.
    let overhead = noop_per_query(10, 150, 3);
    let overhead_ok = overhead < 0.05 * bb_large;

    let pass = kk_growth >= 5.0 && bb_growth <= 1.5 && advantage >= 3.0 && overhead_ok;
    report(
        "1 evaluation-time scaling",
        pass,
        &format!(
            "kk {:.1}us -> {:.1}us ({kk_growth:.2}x, need >= 5), \
             bb {:.1}us -> {:.1}us ({bb_growth:.2}x, need <= 1.5), \
             kk/bb at N=1e4 {advantage:.2}x (need >= 3), \
             harness overhead {:.0}ns ({:.2}% of bb, need < 5%)",
            kk_small * 1e6,
            kk_large * 1e6,
            bb_small * 1e6,
            bb_large * 1e6,
            overhead * 1e9,
            100.0 * overhead / bb_large
        ),
    );
    assert!(pass);
}

/// Criterion 2: at N = 1e4 the double-basis test MSE stays within 1.25x of
/// the kernel-kernel MSE on a 2000-set test split (median over three seeds).
#[test]
fn criterion_2_synthetic_map_accuracy() {
    let _guard = serial();
    let mut ratios = Vec::new();
    let mut details = Vec::new();
    for offset in 0..3u64 {
        let cfg = build_config(&[
            ("experiment", "synthetic-map"),
            ("seed", &(DEFAULT_SEED + offset).to_string()),
            ("train_size", "10000"),
            ("test_size", "2000"),
            ("points_per_set", "auto"),
            ("grid_t", "6.5,9.5"),
            ("grid_d", "1024"),
            ("grid_sigma", "0.5,1"),
            ("grid_lambda", "0.00000001,0.00001,0.001"),
            ("grid_sigma_kk", "0.125,0.25,0.5,1"),
            ("warmup_queries", "2"),
            ("timed_queries", "5"),
        ]);
        let out = run_bench(&cfg).unwrap();
        let bb = row(&out, "bb").mse;
        let kk = row(&out, "kk").mse;
        ratios.push(bb / kk);
        details.push(format!(
            "seed {}: bb {bb:.5} kk {kk:.5} ratio {:.3}",
            DEFAULT_SEED + offset,
            bb / kk
        ));
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = ratios[1];
    let pass = median <= 1.25;
    report(
        "2 synthetic-map accuracy",
        pass,
        &format!("median bb/kk mse ratio {median:.3} (need <= 1.25); {}", details.join("; ")),
    );
    assert!(pass);
}

/// Criterion 3: random-feature kernel approximation over the coefficient
/// ball, and error decay in the feature count.
#[test]
fn criterion_3_kernel_approximation() {
    let spec = draw_feature_map(10, 4096, 1.0, DEFAULT_SEED).unwrap();
    let coarse = draw_feature_map(10, 64, 1.0, DEFAULT_SEED).unwrap();
    let mut rng = derived_rng(DEFAULT_SEED, stream::TEST_INSTANCE, 0);
    let ball_point = |rng: &mut drr::rng::Rng| -> Vec<f64> {
        let g: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
        let norm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let radius = 5.0f64.sqrt() * rng.random::<f64>().powf(0.1);
        g.iter().map(|x| x * radius / norm).collect()
    };
    let mut max_err = 0.0f64;
    let mut mean_fine = 0.0;
    let mut mean_coarse = 0.0;
    for _ in 0..1000 {
        let u = ball_point(&mut rng);
        let v = ball_point(&mut rng);
        let exact = exact_rbf_kernel(&u, &v, 1.0).unwrap();
        let zf = apply_features(&spec, &u)
            .unwrap()
            .dot(apply_features(&spec, &v).unwrap().values());
        let zc = apply_features(&coarse, &u)
            .unwrap()
            .dot(apply_features(&coarse, &v).unwrap().values());
        max_err = max_err.max((zf - exact).abs());
        mean_fine += (zf - exact).abs();
        mean_coarse += (zc - exact).abs();
    }
    mean_fine /= 1000.0;
    mean_coarse /= 1000.0;
    let pass = max_err < 0.05 && mean_fine < mean_coarse;
    report(
        "3 kernel approximation",
        pass,
        &format!(
            "max |K - z'z| = {max_err:.4} (need < 0.05); \
             mean error D=4096 {mean_fine:.5} < D=64 {mean_coarse:.5}"
        ),
    );
    assert!(pass);
}

/// Criterion 4: squared L2 density-estimation error shrinks with sample size
/// at a log-log slope near the -0.8 theory value for gamma = 2.
#[test]
fn criterion_4_density_estimation_rate() {
    let _guard = serial();
    let density = TruncGaussMixture::new(
        TruncGaussComponent::new(0.35, 0.22).unwrap(),
        TruncGaussComponent::new(0.75, 0.27).unwrap(),
    );
    let basis = BasisConfig::isotropic(1, 2.0, 1.0, 1.0).unwrap();
    // True coefficients well past any truncation level used below.
    let max_mode = 200usize;
    let truth: Vec<f64> = (0..=max_mode)
        .map(|j| {
            let alpha = drr::basis::MultiIndex::new(vec![j as u32]);
            trapezoid(
                |x| basis_eval(&basis, &alpha, &[x]).unwrap() * density.pdf(x),
                0.0,
                1.0,
                200_000,
            )
        })
        .collect();
    let sizes = [100usize, 400, 1600, 6400];
    let trials = 50;
    let mut log_n = Vec::new();
    let mut log_err = Vec::new();
    let mut detail = String::new();
    for (si, &n) in sizes.iter().enumerate() {
        let t = choose_truncation(n, &basis, 1.0).unwrap();
        let idx = enumerate_index_set(&basis, t).unwrap();
        let tail: f64 = (0..=max_mode)
            .filter(|&j| j >= idx.len())
            .map(|j| truth[j] * truth[j])
            .sum();
        let mut total = 0.0;
        for trial in 0..trials {
            let seed = 40_000 + (si * trials + trial) as u64;
            let samples = sample_trunc_gauss_mixture(&density, n, seed).unwrap();
            let est = estimate_coefficients(&samples, &idx).unwrap();
            let head: f64 = est
                .values()
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let d = v - truth[j];
                    d * d
                })
                .sum();
            total += head + tail;
        }
        let mean_err = total / trials as f64;
        log_n.push((n as f64).ln());
        log_err.push(mean_err.ln());
        detail.push_str(&format!("n={n}: E||p~-p||^2 = {mean_err:.5} (S={}); ", idx.len()));
    }
    // Least-squares slope of log error against log n.
    let k = log_n.len() as f64;
    let mx = log_n.iter().sum::<f64>() / k;
    let my = log_err.iter().sum::<f64>() / k;
    let slope = log_n
        .iter()
        .zip(&log_err)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / log_n.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    let pass = (-1.1..=-0.5).contains(&slope);
    report(
        "4 density-estimation rate",
        pass,
        &format!("log-log slope {slope:.3} vs theory -0.8 (need within [-1.1, -0.5]); {detail}"),
    );
    assert!(pass);
}

/// Criterion 5: the production solver agrees with an explicit
/// normal-equation inverse to 1e-8 relative, and the lambda = 0 path is the
/// plain least-squares solution bit for bit.
#[test]
fn criterion_5_solver_correctness() {
    // Test-only oracle: Gauss-Jordan inversion with partial pivoting.
    fn invert(a: &Array2<f64>) -> Array2<f64> {
        let n = a.nrows();
        let mut m = a.clone();
        let mut inv = Array2::<f64>::eye(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| m[(i, col)].abs().partial_cmp(&m[(j, col)].abs()).unwrap())
                .unwrap();
            if pivot != col {
                for k in 0..n {
                    m.swap((col, k), (pivot, k));
                    inv.swap((col, k), (pivot, k));
                }
            }
            let d = m[(col, col)];
            assert!(d.abs() > 1e-12, "oracle hit a singular matrix");
            for k in 0..n {
                m[(col, k)] /= d;
                inv[(col, k)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = m[(r, col)];
                    if f != 0.0 {
                        for k in 0..n {
                            m[(r, k)] -= f * m[(col, k)];
                            inv[(r, k)] -= f * inv[(col, k)];
                        }
                    }
                }
            }
        }
        inv
    }

    let mut worst = 0.0f64;
    let mut rng = rng_from_seed(606);
    for system in 0..20 {
        let (n, d) = (200, 50);
        let mut z = Array2::<f64>::zeros((n, d));
        for v in z.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let lambda = if system % 2 == 0 { 0.0 } else { 0.37 };

        let (psi, fallback) = solve_normal_equations(&z, &y, lambda).unwrap();
        assert!(!fallback, "full-rank system took the fallback path");

        let mut reg = z.t().dot(&z);
        for i in 0..d {
            reg[(i, i)] += lambda;
        }
        let rhs = z.t().dot(&ndarray::Array1::from_vec(y.clone()));
        let oracle = invert(&reg).dot(&rhs);

        let diff: f64 = psi
            .iter()
            .zip(oracle.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(diff / norm);

        if lambda == 0.0 {
            let (again, _) = solve_normal_equations(&z, &y, 0.0).unwrap();
            assert_eq!(psi, again, "lambda = 0 solve must be deterministic");
        }
    }
    let pass = worst < 1e-8;
    report(
        "5 solver correctness",
        pass,
        &format!("worst relative gap to the normal-equation oracle {worst:.2e} (need < 1e-8)"),
    );
    assert!(pass);
}

/// Criterion 6: scaled GMM component-count experiment; double-basis must
/// beat the mean predictor (MSE 8.25) with the classical criteria reported.
#[test]
fn criterion_6_gmm_model_selection() {
    let _guard = serial();
    let cfg = build_config(&[
        ("experiment", "gmm-modelsel"),
        ("seed", &DEFAULT_SEED.to_string()),
        ("train_size", "4000"),
        ("test_size", "500"),
        ("points_per_set", "200"),
        ("grid_t", "8,12"),
        ("grid_d", "1024"),
        ("grid_sigma", "0.5,1"),
        ("grid_lambda", "0.00001,0.001,0.1"),
        ("grid_sigma_kk", "0.25,0.5,1"),
        ("warmup_queries", "2"),
        ("timed_queries", "25"),
    ]);
    let out = run_bench(&cfg).unwrap();
    let bb = row(&out, "bb");
    let baseline = (10.0f64 * 10.0 - 1.0) / 12.0; // variance of Unif{1..10}
    let mut detail = format!("bb mse {:.3} (need < {baseline}); ", bb.mse);
    let mut rows_ok = true;
    for m in ["kk", "aic", "bic", "cv"] {
        let r = row(&out, m);
        rows_ok &= r.per_query_seconds > 0.0 && r.train_seconds > 0.0;
        detail.push_str(&format!(
            "{m} mse {:.3} per-query {:.1}ms; ",
            r.mse,
            r.per_query_seconds * 1e3
        ));
    }
    let pass = bb.mse < baseline && rows_ok;
    report("6 gmm model selection", pass, &detail);
    assert!(pass);
}

/// Criterion 7: scaled Dirichlet estimation at n = 10; double-basis must
/// beat the prior-mean baseline (per-coordinate MSE 8.167) with the MLE row
/// recorded for comparison.
#[test]
fn criterion_7_dirichlet_estimation() {
    let _guard = serial();
    let cfg = build_config(&[
        ("experiment", "dirichlet"),
        ("seed", &DEFAULT_SEED.to_string()),
        ("train_size", "4000"),
        ("test_size", "500"),
        ("points_per_set", "10"),
        ("dirichlet_dim", "3"),
        ("grid_t", "2,3,4"),
        ("grid_d", "512"),
        ("grid_sigma", "0.5,1"),
        ("grid_lambda", "0.0001,0.01,1"),
        ("grid_sigma_kk", "0.25,0.5,1"),
        ("warmup_queries", "5"),
        ("timed_queries", "100"),
    ]);
    let out = run_bench(&cfg).unwrap();
    let bb = row(&out, "bb");
    let mle = row(&out, "mle");
    let kk = row(&out, "kk");
    let baseline = 8.167; // prior-mean predictor for Unif[0.1, 10]
    let pass = bb.mse < baseline && mle.per_query_seconds > 0.0 && mle.train_seconds > 0.0;
    report(
        "7 dirichlet estimation",
        pass,
        &format!(
            "bb per-coordinate mse {:.3} (need < {baseline}); \
             mle mse {:.3} per-query {:.2}ms (recorded); kk mse {:.3}; \
             bb beats mle at n=10: {}",
            bb.mse,
            mle.mse,
            mle.per_query_seconds * 1e3,
            kk.mse,
            bb.mse < mle.mse
        ),
    );
    assert!(pass);
}

/// Criterion 8: the module property gates under three distinct seeds.
#[test]
fn criterion_8_property_suites() {
    let _guard = serial();
    let seeds = [DEFAULT_SEED, DEFAULT_SEED + 17, DEFAULT_SEED + 40];
    let mut checks = Vec::new();

    // Orthonormality of the evaluated basis on a fine grid.
    for &seed in &seeds {
        let mut rng = rng_from_seed(seed);
        let c = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        for _ in 0..4 {
            let a = (rng.random::<f64>() * 5.0) as u32;
            let b = (rng.random::<f64>() * 5.0) as u32;
            let ia = drr::basis::MultiIndex::new(vec![a]);
            let ib = drr::basis::MultiIndex::new(vec![b]);
            let integral = trapezoid(
                |x| basis_eval(&c, &ia, &[x]).unwrap() * basis_eval(&c, &ib, &[x]).unwrap(),
                0.0,
                1.0,
                100_000,
            );
            let expected = if a == b { 1.0 } else { 0.0 };
            checks.push(((integral - expected).abs() <= 1e-8, "orthonormality"));
        }
    }

    // Parseval: coefficient-space distance matches quadrature.
    for &seed in &seeds {
        let c = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let idx = enumerate_index_set(&c, 5.0).unwrap();
        let mut rng = rng_from_seed(seed ^ 0xBEEF);
        let p1 = draw_trunc_gauss_mixture(&mut rng);
        let p2 = draw_trunc_gauss_mixture(&mut rng);
        let s1 = sample_trunc_gauss_mixture(&p1, 120, seed + 1).unwrap();
        let s2 = sample_trunc_gauss_mixture(&p2, 120, seed + 2).unwrap();
        let c1 = estimate_coefficients(&s1, &idx).unwrap();
        let c2 = estimate_coefficients(&s2, &idx).unwrap();
        let d = l2_distance(&c1, &c2, &idx).unwrap();
        let q = quadrature_l2(&idx, &c1, &c2, 50_000).unwrap();
        checks.push(((d * d - q).abs() <= 1e-6, "parseval"));
    }

    // Kernel-kernel weight normalization: constant responses average to one.
    for &seed in &seeds {
        let c = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let mut rng = rng_from_seed(seed ^ 0xF00D);
        let data: Vec<(SampleSet, f64)> = (0..25)
            .map(|i| {
                let p = draw_trunc_gauss_mixture(&mut rng);
                (
                    sample_trunc_gauss_mixture(&p, 30, seed * 100 + i).unwrap(),
                    1.0,
                )
            })
            .collect();
        let model = kk_fit(
            &data,
            &c,
            4.0,
            0.5,
            KernelKind::Rbf,
            drr::basis::DomainTransform::identity(1),
            seed,
        )
        .unwrap();
        let q = draw_trunc_gauss_mixture(&mut rng);
        let qs = sample_trunc_gauss_mixture(&q, 30, seed + 999).unwrap();
        let p = kk_predict(&model, &qs).unwrap();
        checks.push(((p - 1.0).abs() <= 1e-12, "kk weight normalization"));
    }

    // Truncation bound on double-basis predictions.
    for &seed in &seeds {
        let c = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let mut rng = rng_from_seed(seed ^ 0xCAFE);
        let data: Vec<(SampleSet, f64)> = (0..20)
            .map(|i| {
                let p = draw_trunc_gauss_mixture(&mut rng);
                (
                    sample_trunc_gauss_mixture(&p, 25, seed * 7 + i).unwrap(),
                    rng.random::<f64>() * 20.0 - 10.0,
                )
            })
            .collect();
        let cfg = drr::regress::FitConfig {
            basis: c,
            truncation: 4.0,
            feature_count: 24,
            bandwidth: 1.0,
            lambda: 0.0,
            seed,
            response_bound: Some(0.5),
            transform: drr::basis::DomainTransform::identity(1),
        };
        let model = drr::regress::fit_double_basis(&data, &cfg).unwrap();
        let mut bound_ok = true;
        for i in 0..10 {
            let q = draw_trunc_gauss_mixture(&mut rng);
            let qs = sample_trunc_gauss_mixture(&q, 25, seed * 13 + i).unwrap();
            bound_ok &= predict(&model, &qs).unwrap().abs() <= 0.5;
        }
        checks.push((bound_ok, "truncation bound"));
    }

    // EM log-likelihood monotonicity.
    for &seed in &seeds {
        let mut rng = rng_from_seed(seed ^ 0xE);
        let pts: Vec<[f64; 2]> = (0..150)
            .map(|_| {
                let cx = if rng.random::<f64>() < 0.5 { -2.0 } else { 2.0 };
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                [cx + 0.5 * a, 0.5 * b]
            })
            .collect();
        let fit = em_fit(&pts, 3, &EmOptions::default(), seed).unwrap();
        let monotone = fit.ll_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        checks.push((monotone, "em monotonicity"));
    }

    // Dirichlet MLE stationarity.
    for &seed in &seeds {
        let spec = DirichletSpec::new(vec![1.5, 4.0, 0.8]).unwrap();
        let pts = sample_dirichlet_points(&spec, 3000, seed).unwrap();
        let tol = 1e-9;
        let fit = dirichlet_mle(&pts, 500, tol).unwrap();
        let grad =
            dirichlet_log_likelihood_gradient(&fit.alpha, &mean_log_statistics(&pts).unwrap());
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        checks.push((fit.converged && gnorm < 10.0 * tol, "dirichlet stationarity"));
    }

    // End-to-end determinism of a small pipeline.
    for &seed in &seeds {
        let cfg = build_config(&[
            ("experiment", "synthetic-map"),
            ("seed", &seed.to_string()),
            ("train_size", "40"),
            ("test_size", "12"),
            ("points_per_set", "12"),
            ("grid_t", "3"),
            ("grid_d", "32"),
            ("timed_queries", "3"),
            ("warmup_queries", "1"),
        ]);
        let a = run_bench(&cfg).unwrap();
        let b = run_bench(&cfg).unwrap();
        let same = a
            .rows
            .iter()
            .zip(&b.rows)
            .all(|(x, y)| x.mse == y.mse && x.config_digest == y.config_digest);
        checks.push((same, "end-to-end determinism"));
    }

    let failed: Vec<&str> = checks
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| *name)
        .collect();
    let pass = failed.is_empty();
    report(
        "8 property suites",
        pass,
        &if pass {
            format!("{} checks across 3 seeds", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    );
    assert!(pass);
}
