//! Benchmark pipeline: synthesize train/test datasets, fit every requested
//! method (with grid selection on a validation split), evaluate test MSE, and
//! time per-query prediction with a warmup/median harness on a monotonic
//! clock. Everything except the wall-clock columns is a pure function of the
//! configuration.

use std::hint::black_box;
use std::time::Instant;

use crate::baselines::{dirichlet_mle, select_k, EmOptions, SelectionCriterion};
use crate::basis::BasisConfig;
use crate::config::{ExperimentConfig, FeatureGrid, Method, TruncationGrid};
use crate::dataset::{build_dataset, Dataset, ExperimentKind, Split, SynthSpec};
use crate::error::{Error, Result};
use crate::model_file::TrainedModel;
use crate::regress::{
    fit_double_basis_multi, kk_fit, select_hyperparameters, select_kk_bandwidth, FitConfig,
    HyperGrid,
};
use crate::rks::choose_feature_count;
use crate::rng::{derive_seed, derived_rng, stream};
use crate::sample::SampleSet;
use crate::synth::gmm_domain_transform;
use rand::seq::SliceRandom;

pub const REPORT_SCHEMA: &str = "# drr-bench v1";
pub const REPORT_HEADER: &str =
    "method,train_size,points_per_set,mse,per_query_seconds,train_seconds,config_digest";

/// Auto-selected feature counts are capped here to keep desk-scale runs sane.
pub const AUTO_FEATURE_CAP: usize = 4096;

const SUBSTREAM_BASELINE: u64 = 201;

/// One (method, dataset) result.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub train_size: usize,
    pub points_per_set: usize,
    pub mse: f64,
    pub per_query_seconds: f64,
    pub train_seconds: f64,
    pub config_digest: String,
}

/// A full benchmark report.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub schema_version: u32,
    pub rows: Vec<BenchRow>,
    pub notes: Vec<String>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median-of-repetitions of median per-query wall time, in seconds. Queries
/// rotate through `pool` indices; `f` runs one query.
pub fn time_per_query<F: FnMut(usize)>(
    pool: usize,
    warmup: usize,
    timed: usize,
    repetitions: usize,
    mut f: F,
) -> f64 {
    assert!(pool > 0 && timed > 0 && repetitions > 0);
    for q in 0..warmup {
        f(q % pool);
    }
    let mut per_rep = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let mut times = Vec::with_capacity(timed);
        for q in 0..timed {
            let start = Instant::now();
            f(q % pool);
            times.push(start.elapsed().as_secs_f64());
        }
        per_rep.push(median(&mut times));
    }
    median(&mut per_rep)
}

/// Per-query overhead of the harness itself (timing a no-op predictor).
pub fn noop_per_query(warmup: usize, timed: usize, repetitions: usize) -> f64 {
    time_per_query(1, warmup, timed, repetitions, |q| {
        black_box(q);
    })
}

/// The basis implied by an experiment configuration.
pub fn basis_from_config(cfg: &ExperimentConfig) -> Result<BasisConfig> {
    BasisConfig::new(
        cfg.input_dimension(),
        cfg.basis_gamma.clone(),
        cfg.basis_nu.clone(),
        cfg.basis_radius,
    )
}

fn resolve_truncations(cfg: &ExperimentConfig, basis: &BasisConfig, n: usize) -> Result<Vec<f64>> {
    match &cfg.grid_t {
        TruncationGrid::Explicit(t) => Ok(t.clone()),
        TruncationGrid::RuleConstants(cs) => cs
            .iter()
            .map(|&c| crate::basis::choose_truncation(n, basis, c))
            .collect(),
    }
}

fn resolve_feature_counts(cfg: &ExperimentConfig, n: usize) -> Result<Vec<usize>> {
    match &cfg.grid_d {
        FeatureGrid::Explicit(d) => Ok(d.clone()),
        FeatureGrid::RuleConstants(cs) => cs
            .iter()
            .map(|&c| Ok(choose_feature_count(n.max(2), c)?.min(AUTO_FEATURE_CAP)))
            .collect(),
    }
}

/// Deterministic (fit, validation) split of the training instances.
fn split_validation(
    dataset: &Dataset,
    fraction: f64,
    seed: u64,
) -> (Vec<(SampleSet, Vec<f64>)>, Vec<(SampleSet, Vec<f64>)>) {
    let n = dataset.instances.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut derived_rng(seed, stream::SPLIT, 1));
    let val_len = ((n as f64 * fraction).floor() as usize).clamp(1, n.saturating_sub(1).max(1));
    let to_pairs = |ids: &[usize]| {
        ids.iter()
            .map(|&i| {
                let inst = &dataset.instances[i];
                (inst.samples.clone(), inst.response.clone())
            })
            .collect::<Vec<_>>()
    };
    if n < 2 {
        return (to_pairs(&order), Vec::new());
    }
    let valid = to_pairs(&order[..val_len]);
    let fit = to_pairs(&order[val_len..]);
    (fit, valid)
}

fn scalarize(pairs: &[(SampleSet, Vec<f64>)], out: usize) -> Vec<(SampleSet, f64)> {
    pairs
        .iter()
        .map(|(s, y)| (s.clone(), y[out]))
        .collect()
}

/// A fitted method plus its wall-clock training cost.
pub struct FittedMethod {
    pub model: TrainedModel,
    pub train_seconds: f64,
    pub selection_note: String,
}

/// Fit the double-basis estimator for a benchmark configuration, running the
/// validation grid search when more than one grid point is in play.
pub fn fit_bb(cfg: &ExperimentConfig, basis: &BasisConfig, train: &Dataset) -> Result<FittedMethod> {
    let n_points = train.meta.points_per_set;
    let truncations = resolve_truncations(cfg, basis, n_points)?;
    let feature_counts = resolve_feature_counts(cfg, n_points)?;
    let transform = match cfg.experiment {
        ExperimentKind::GmmModelSel => gmm_domain_transform(),
        _ => crate::basis::DomainTransform::identity(cfg.input_dimension()),
    };
    let base = FitConfig {
        basis: basis.clone(),
        truncation: truncations[0],
        feature_count: feature_counts[0],
        bandwidth: cfg.grid_sigma[0],
        lambda: cfg.grid_lambda[0],
        seed: derive_seed(cfg.seed, stream::FEATURE_MAP, 0),
        response_bound: None,
        transform,
    };
    let started = Instant::now();
    let combos = truncations.len() * feature_counts.len() * cfg.grid_sigma.len() * cfg.grid_lambda.len();
    let all_pairs = train.vector_pairs();
    let response_dim = train.meta.response_dim;
    let (chosen, note) = if combos > 1 && train.instances.len() >= 2 {
        let (fit_split, valid_split) = split_validation(train, cfg.validation_fraction, cfg.seed);
        let grid = HyperGrid {
            truncation: truncations,
            feature_count: feature_counts,
            bandwidth: cfg.grid_sigma.clone(),
            lambda: cfg.grid_lambda.clone(),
        };
        // Selection scores the first response coordinate; outputs share the
        // representation by construction.
        let sel = select_hyperparameters(
            &scalarize(&fit_split, 0),
            &scalarize(&valid_split, 0),
            &grid,
            &base,
        )?;
        let note = format!(
            "selected t={} D={} sigma={} lambda={} (validation mse {:.6})",
            sel.truncation, sel.feature_count, sel.bandwidth, sel.lambda, sel.validation_mse
        );
        (
            FitConfig {
                truncation: sel.truncation,
                feature_count: sel.feature_count,
                bandwidth: sel.bandwidth,
                lambda: sel.lambda,
                ..base
            },
            note,
        )
    } else {
        let note = format!(
            "single grid point t={} D={} sigma={} lambda={}",
            base.truncation, base.feature_count, base.bandwidth, base.lambda
        );
        (base, note)
    };
    let mut models = fit_double_basis_multi(&all_pairs, &chosen)?;
    debug_assert_eq!(models.len(), response_dim);
    for m in &mut models {
        m.set_selection_note(note.clone());
    }
    Ok(FittedMethod {
        model: TrainedModel::DoubleBasis(models),
        train_seconds: started.elapsed().as_secs_f64(),
        selection_note: note,
    })
}

/// Fit the kernel-kernel smoother, selecting its bandwidth on a validation
/// split when a grid was given.
pub fn fit_kk(cfg: &ExperimentConfig, basis: &BasisConfig, train: &Dataset) -> Result<FittedMethod> {
    let n_points = train.meta.points_per_set;
    let truncation = resolve_truncations(cfg, basis, n_points)?[0];
    let transform = match cfg.experiment {
        ExperimentKind::GmmModelSel => gmm_domain_transform(),
        _ => crate::basis::DomainTransform::identity(cfg.input_dimension()),
    };
    let started = Instant::now();
    let response_dim = train.meta.response_dim;
    let (bandwidth, note) = if cfg.grid_sigma_kk.len() > 1 && train.instances.len() >= 2 {
        let (fit_split, valid_split) = split_validation(train, cfg.validation_fraction, cfg.seed);
        let (bw, mse) = select_kk_bandwidth(
            &scalarize(&fit_split, 0),
            &scalarize(&valid_split, 0),
            &cfg.grid_sigma_kk,
            cfg.kk_kernel,
            basis,
            truncation,
            &transform,
            cfg.seed,
        )?;
        (bw, format!("selected sigma_kk={bw} (validation mse {mse:.6})"))
    } else {
        (
            cfg.grid_sigma_kk[0],
            format!("single grid point sigma_kk={}", cfg.grid_sigma_kk[0]),
        )
    };
    let mut models = Vec::with_capacity(response_dim);
    for out in 0..response_dim {
        let pairs: Vec<(SampleSet, f64)> = train
            .instances
            .iter()
            .map(|i| (i.samples.clone(), i.response[out]))
            .collect();
        let mut m = kk_fit(
            &pairs,
            basis,
            truncation,
            bandwidth,
            cfg.kk_kernel,
            transform.clone(),
            cfg.seed,
        )?;
        m.set_selection_note(note.clone());
        models.push(m);
    }
    Ok(FittedMethod {
        model: TrainedModel::KernelKernel(models),
        train_seconds: started.elapsed().as_secs_f64(),
        selection_note: note,
    })
}

fn raw_points_2d(samples: &SampleSet) -> Vec<[f64; 2]> {
    let transform = gmm_domain_transform();
    samples
        .points()
        .rows()
        .into_iter()
        .map(|r| {
            let raw = transform
                .from_unit(r.as_slice().expect("contiguous row"))
                .expect("dimension checked upstream");
            [raw[0], raw[1]]
        })
        .collect()
}

fn full_simplex_points(samples: &SampleSet) -> Vec<Vec<f64>> {
    samples
        .points()
        .rows()
        .into_iter()
        .map(|r| {
            let mut p: Vec<f64> = r.to_vec();
            let last = (1.0 - p.iter().sum::<f64>()).max(0.0);
            p.push(last);
            p
        })
        .collect()
}

fn mse_of_predictions(test: &Dataset, preds: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (inst, p) in test.instances.iter().zip(preds) {
        for (&y, &yhat) in inst.response.iter().zip(p) {
            let e = yhat - y;
            acc += e * e;
            count += 1;
        }
    }
    acc / count as f64
}

/// Run the configured benchmark: one report row per method.
pub fn run_bench(cfg: &ExperimentConfig) -> Result<BenchReport> {
    let n_points = cfg.resolved_points(cfg.train_size);
    let make_spec = |num_sets: usize| SynthSpec {
        kind: cfg.experiment,
        seed: cfg.seed,
        num_sets,
        points_per_set: n_points,
        dirichlet_dim: cfg.dirichlet_dim,
        noise_std: cfg.noise_std,
    };
    let train = build_dataset(&make_spec(cfg.train_size), Split::Train)?;
    let test = build_dataset(&make_spec(cfg.test_size), Split::Test)?;
    if test.instances.is_empty() {
        return Err(Error::InvalidArgument("test split is empty".into()));
    }
    let basis = basis_from_config(cfg)?;
    let digest = cfg.digest();

    let mut rows = Vec::new();
    let mut notes = vec![
        "kernel-kernel baseline shares the projection-coefficient representation \
         (kernel density estimation is not used)"
            .to_string(),
    ];

    for method in &cfg.methods {
        let row = match method {
            Method::Bb | Method::Kk => {
                let fitted = match method {
                    Method::Bb => fit_bb(cfg, &basis, &train)?,
                    _ => fit_kk(cfg, &basis, &train)?,
                };
                notes.push(format!("{}: {}", method.name(), fitted.selection_note));
                let raw = !cfg.truncate_predictions;
                let preds: Vec<Vec<f64>> = test
                    .instances
                    .iter()
                    .map(|i| fitted.model.predict_all(&i.samples, raw))
                    .collect::<Result<_>>()?;
                let mse = mse_of_predictions(&test, &preds);
                let per_query = time_per_query(
                    test.instances.len(),
                    cfg.warmup_queries,
                    cfg.timed_queries,
                    cfg.repetitions,
                    |q| {
                        black_box(
                            fitted
                                .model
                                .predict_all(&test.instances[q].samples, raw)
                                .expect("prediction on generated data"),
                        );
                    },
                );
                BenchRow {
                    method: method.name().into(),
                    train_size: cfg.train_size,
                    points_per_set: n_points,
                    mse,
                    per_query_seconds: per_query,
                    train_seconds: fitted.train_seconds.max(1e-9),
                    config_digest: digest.clone(),
                }
            }
            Method::Aic | Method::Bic | Method::Cv => {
                let criterion = match method {
                    Method::Aic => SelectionCriterion::Aic,
                    Method::Bic => SelectionCriterion::Bic,
                    _ => SelectionCriterion::HoldoutCv {
                        holdout_fraction: cfg.cv_holdout_fraction,
                    },
                };
                let opts = EmOptions {
                    restarts: cfg.em_restarts,
                    max_iters: cfg.em_max_iters,
                    tol: cfg.em_tol,
                };
                let started = Instant::now();
                let query = |q: usize| -> Result<f64> {
                    let pts = raw_points_2d(&test.instances[q].samples);
                    let seed = derive_seed(cfg.seed, SUBSTREAM_BASELINE, q as u64);
                    Ok(select_k(&pts, 1..=10, criterion, &opts, seed)?.chosen_k as f64)
                };
                let train_seconds = started.elapsed().as_secs_f64().max(1e-9);
                let preds: Vec<Vec<f64>> = (0..test.instances.len())
                    .map(|q| Ok(vec![query(q)?]))
                    .collect::<Result<_>>()?;
                let mse = mse_of_predictions(&test, &preds);
                let per_query = time_per_query(
                    test.instances.len(),
                    cfg.warmup_queries.min(2),
                    cfg.timed_queries,
                    cfg.repetitions,
                    |q| {
                        black_box(query(q).expect("model selection on generated data"));
                    },
                );
                BenchRow {
                    method: method.name().into(),
                    train_size: cfg.train_size,
                    points_per_set: n_points,
                    mse,
                    per_query_seconds: per_query,
                    train_seconds,
                    config_digest: digest.clone(),
                }
            }
            Method::Mle => {
                let started = Instant::now();
                let query = |q: usize| -> Result<Vec<f64>> {
                    let pts = full_simplex_points(&test.instances[q].samples);
                    Ok(dirichlet_mle(&pts, cfg.mle_max_iters, cfg.mle_tol)?.alpha)
                };
                let train_seconds = started.elapsed().as_secs_f64().max(1e-9);
                let preds: Vec<Vec<f64>> = (0..test.instances.len())
                    .map(|q| query(q))
                    .collect::<Result<_>>()?;
                let mse = mse_of_predictions(&test, &preds);
                let per_query = time_per_query(
                    test.instances.len(),
                    cfg.warmup_queries,
                    cfg.timed_queries,
                    cfg.repetitions,
                    |q| {
                        black_box(query(q).expect("estimation on generated data"));
                    },
                );
                BenchRow {
                    method: method.name().into(),
                    train_size: cfg.train_size,
                    points_per_set: n_points,
                    mse,
                    per_query_seconds: per_query,
                    train_seconds,
                    config_digest: digest.clone(),
                }
            }
        };
        rows.push(row);
    }
    Ok(BenchReport {
        schema_version: 1,
        rows,
        notes,
    })
}

/// Render the versioned CSV form.
pub fn report_to_csv(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(REPORT_SCHEMA);
    out.push('\n');
    for note in &report.notes {
        out.push_str("# note: ");
        out.push_str(note);
        out.push('\n');
    }
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            r.train_size,
            r.points_per_set,
            r.mse,
            r.per_query_seconds,
            r.train_seconds,
            r.config_digest
        ));
    }
    out
}

/// Parse and validate a report CSV; rejects schema violations.
pub fn parse_report_csv(text: &str) -> Result<BenchReport> {
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("report is empty".into()))?;
    if first != REPORT_SCHEMA {
        return Err(Error::Parse(format!(
            "report schema line {first:?} is not {REPORT_SCHEMA:?}"
        )));
    }
    let mut notes = Vec::new();
    let mut header_seen = false;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if let Some(note) = line.strip_prefix("# note: ") {
            if header_seen {
                return Err(Error::Parse(format!(
                    "line {}: notes must precede the header",
                    lineno + 2
                )));
            }
            notes.push(note.to_string());
            continue;
        }
        if !header_seen {
            if line != REPORT_HEADER {
                return Err(Error::Parse(format!(
                    "line {}: header {line:?} is not {REPORT_HEADER:?}",
                    lineno + 2
                )));
            }
            header_seen = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "line {}: expected 7 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_num = |what: &str, s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {what}: {e}", lineno + 2)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "line {}: {what} must be finite",
                    lineno + 2
                )));
            }
            Ok(v)
        };
        let row = BenchRow {
            method: fields[0].to_string(),
            train_size: fields[1]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: train_size: {e}", lineno + 2)))?,
            points_per_set: fields[2]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: points_per_set: {e}", lineno + 2)))?,
            mse: parse_num("mse", fields[3])?,
            per_query_seconds: parse_num("per_query_seconds", fields[4])?,
            train_seconds: parse_num("train_seconds", fields[5])?,
            config_digest: fields[6].to_string(),
        };
        if row.mse < 0.0 {
            return Err(Error::Parse(format!("line {}: mse must be >= 0", lineno + 2)));
        }
        if row.per_query_seconds <= 0.0 || row.train_seconds <= 0.0 {
            return Err(Error::Parse(format!(
                "line {}: times must be positive",
                lineno + 2
            )));
        }
        if row.method.is_empty() || row.config_digest.is_empty() {
            return Err(Error::Parse(format!(
                "line {}: method and config_digest must be nonempty",
                lineno + 2
            )));
        }
        rows.push(row);
    }
    if !header_seen {
        return Err(Error::Parse("report is missing its header line".into()));
    }
    Ok(BenchReport {
        schema_version: 1,
        rows,
        notes,
    })
}

/// Human-readable table.
pub fn render_table(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:>10} {:>8} {:>14} {:>16} {:>12}\n",
        "method", "N", "n", "mse", "per-query (s)", "train (s)"
    ));
    for r in &report.rows {
        out.push_str(&format!(
            "{:<8} {:>10} {:>8} {:>14.6} {:>16.9} {:>12.3}\n",
            r.method, r.train_size, r.points_per_set, r.mse, r.per_query_seconds, r.train_seconds
        ));
    }
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn median_and_noop_behave() {
        let mut v = [3.0, 1.0, 2.0];
        assert_eq!(median(&mut v), 2.0);
        let mut w = [4.0, 1.0, 2.0, 3.0];
        assert_eq!(median(&mut w), 2.5);
        assert!(noop_per_query(2, 50, 3) >= 0.0);
    }

    #[test]
    fn tiny_synthetic_bench_is_mse_deterministic() {
        let cfg = parse_config(
            "experiment = synthetic-map\nseed = 3\ntrain_size = 30\ntest_size = 10\n\
             points_per_set = 12\ngrid_t = 2.5\ngrid_d = 32\ntimed_queries = 5\nwarmup_queries = 2\n",
        )
        .unwrap();
        let a = run_bench(&cfg).unwrap();
        let b = run_bench(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.method, y.method);
            assert_eq!(x.mse, y.mse);
            assert_eq!(x.config_digest, y.config_digest);
            assert!(x.per_query_seconds > 0.0 && x.train_seconds > 0.0);
        }
    }

    #[test]
    fn csv_round_trip_and_schema_check() {
        let report = BenchReport {
            schema_version: 1,
            rows: vec![BenchRow {
                method: "bb".into(),
                train_size: 100,
                points_per_set: 16,
                mse: 0.25,
                per_query_seconds: 1e-5,
                train_seconds: 0.5,
                config_digest: "deadbeef".into(),
            }],
            notes: vec!["example".into()],
        };
        let csv = report_to_csv(&report);
        let parsed = parse_report_csv(&csv).unwrap();
        assert_eq!(report, parsed);

        assert!(parse_report_csv("").is_err());
        assert!(parse_report_csv("# wrong\n").is_err());
        let bad_header = csv.replace(REPORT_HEADER, "method,a,b");
        assert!(parse_report_csv(&bad_header).is_err());
        let negative = csv.replace("0.25", "-1");
        assert!(parse_report_csv(&negative).is_err());
        let zero_time = csv.replace("0.00001", "0");
        assert!(parse_report_csv(&zero_time).is_err());
    }
}
