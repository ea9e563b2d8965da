//! Classical statistical baselines: EM fitting of 2-D Gaussian mixtures with
//! AIC/BIC/holdout model selection over the component count, and maximum
//! likelihood estimation of Dirichlet concentrations.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{derived_rng, stream};
use crate::special::{digamma, inverse_digamma, trigamma};

/// Covariance ridge added at every M-step to keep components invertible.
pub const COVARIANCE_REGULARIZER: f64 = 1e-6;

/// EM fitting controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative log-likelihood improvement below which a run stops.
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            restarts: 5,
            max_iters: 100,
            tol: 1e-6,
        }
    }
}

/// A fitted 2-D Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedGmm {
    pub weights: Vec<f64>,
    pub means: Vec<[f64; 2]>,
    pub covariances: Vec<[[f64; 2]; 2]>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Per-iteration log-likelihood of the winning restart.
    pub ll_trace: Vec<f64>,
}

impl FittedGmm {
    pub fn k(&self) -> usize {
        self.weights.len()
    }
}

struct Component {
    weight: f64,
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
    // Derived quantities for the E-step.
    inv: [[f64; 2]; 2],
    log_norm: f64,
}

impl Component {
    fn refresh(&mut self) {
        let [[a, b], [_, d]] = self.cov;
        let det = a * d - b * b;
        self.inv = [[d / det, -b / det], [-b / det, a / det]];
        self.log_norm = -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln();
    }

    fn log_pdf(&self, x: &[f64; 2]) -> f64 {
        let dx = [x[0] - self.mean[0], x[1] - self.mean[1]];
        let q = dx[0] * (self.inv[0][0] * dx[0] + self.inv[0][1] * dx[1])
            + dx[1] * (self.inv[1][0] * dx[0] + self.inv[1][1] * dx[1]);
        self.log_norm - 0.5 * q + self.weight.ln()
    }
}

fn sample_covariance(points: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let n = points.len() as f64;
    let mean = [
        points.iter().map(|p| p[0]).sum::<f64>() / n,
        points.iter().map(|p| p[1]).sum::<f64>() / n,
    ];
    let mut cov = [[0.0f64; 2]; 2];
    for p in points {
        let d = [p[0] - mean[0], p[1] - mean[1]];
        cov[0][0] += d[0] * d[0];
        cov[0][1] += d[0] * d[1];
        cov[1][1] += d[1] * d[1];
    }
    cov[0][0] = cov[0][0] / n + COVARIANCE_REGULARIZER;
    cov[0][1] /= n;
    cov[1][0] = cov[0][1];
    cov[1][1] = cov[1][1] / n + COVARIANCE_REGULARIZER;
    cov
}

/// Best-of-restarts EM fit with `k` full-covariance components.
pub fn em_fit(points: &[[f64; 2]], k: usize, opts: &EmOptions, seed: u64) -> Result<FittedGmm> {
    if k == 0 {
        return Err(Error::InvalidArgument("component count must be >= 1".into()));
    }
    if points.len() < k {
        return Err(Error::InvalidArgument(format!(
            "need at least k = {k} points, got {}",
            points.len()
        )));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restart count must be >= 1".into()));
    }
    let mut best: Option<FittedGmm> = None;
    for restart in 0..opts.restarts {
        let fit = em_fit_once(points, k, opts, seed, restart as u64);
        let better = best
            .as_ref()
            .map_or(true, |b| fit.log_likelihood > b.log_likelihood);
        if better {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart ran"))
}

fn em_fit_once(
    points: &[[f64; 2]],
    k: usize,
    opts: &EmOptions,
    seed: u64,
    restart: u64,
) -> FittedGmm {
    let n = points.len();
    let mut rng = derived_rng(seed, stream::INIT, restart);
    // Initialize means at k distinct data points.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let base_cov = sample_covariance(points);
    let mut comps: Vec<Component> = order[..k]
        .iter()
        .map(|&i| {
            let mut c = Component {
                weight: 1.0 / k as f64,
                mean: points[i],
                cov: base_cov,
                inv: [[0.0; 2]; 2],
                log_norm: 0.0,
            };
            c.refresh();
            c
        })
        .collect();

    let mut resp = vec![0.0f64; n * k];
    let mut trace = Vec::new();
    let mut prev_ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iters {
        iterations += 1;
        // E-step with log-sum-exp stabilization.
        let mut ll = 0.0;
        for (i, p) in points.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut max_lp = f64::NEG_INFINITY;
            for (j, c) in comps.iter().enumerate() {
                let lp = c.log_pdf(p);
                row[j] = lp;
                max_lp = max_lp.max(lp);
            }
            let mut z = 0.0;
            for r in row.iter_mut() {
                *r = (*r - max_lp).exp();
                z += *r;
            }
            for r in row.iter_mut() {
                *r /= z;
            }
            ll += max_lp + z.ln();
        }
        trace.push(ll);

        // M-step with a ridge on every covariance.
        for (j, c) in comps.iter_mut().enumerate() {
            let mut nk = 0.0;
            let mut mean = [0.0f64; 2];
            for (i, p) in points.iter().enumerate() {
                let r = resp[i * k + j];
                nk += r;
                mean[0] += r * p[0];
                mean[1] += r * p[1];
            }
            if nk > 1e-12 {
                mean[0] /= nk;
                mean[1] /= nk;
                let mut cov = [[0.0f64; 2]; 2];
                for (i, p) in points.iter().enumerate() {
                    let r = resp[i * k + j];
                    let d = [p[0] - mean[0], p[1] - mean[1]];
                    cov[0][0] += r * d[0] * d[0];
                    cov[0][1] += r * d[0] * d[1];
                    cov[1][1] += r * d[1] * d[1];
                }
                cov[0][0] = cov[0][0] / nk + COVARIANCE_REGULARIZER;
                cov[0][1] /= nk;
                cov[1][0] = cov[0][1];
                cov[1][1] = cov[1][1] / nk + COVARIANCE_REGULARIZER;
                c.mean = mean;
                c.cov = cov;
            }
            c.weight = (nk / n as f64).max(f64::MIN_POSITIVE);
            c.refresh();
        }

        if prev_ll.is_finite() {
            let improvement = ll - prev_ll;
            if improvement.abs() < opts.tol * prev_ll.abs().max(1.0) {
                converged = true;
                prev_ll = ll;
                break;
            }
        }
        prev_ll = ll;
    }

    FittedGmm {
        weights: comps.iter().map(|c| c.weight).collect(),
        means: comps.iter().map(|c| c.mean).collect(),
        covariances: comps.iter().map(|c| c.cov).collect(),
        log_likelihood: prev_ll,
        iterations,
        converged,
        ll_trace: trace,
    }
}

/// Mean log-likelihood per point of a fitted mixture on held-out data.
pub fn gmm_mean_log_likelihood(fit: &FittedGmm, points: &[[f64; 2]]) -> f64 {
    let comps: Vec<Component> = fit
        .weights
        .iter()
        .zip(&fit.means)
        .zip(&fit.covariances)
        .map(|((&w, &mean), &cov)| {
            let mut c = Component {
                weight: w,
                mean,
                cov,
                inv: [[0.0; 2]; 2],
                log_norm: 0.0,
            };
            c.refresh();
            c
        })
        .collect();
    let mut ll = 0.0;
    for p in points {
        let mut max_lp = f64::NEG_INFINITY;
        let lps: Vec<f64> = comps.iter().map(|c| c.log_pdf(p)).collect();
        for &lp in &lps {
            max_lp = max_lp.max(lp);
        }
        let z: f64 = lps.iter().map(|lp| (lp - max_lp).exp()).sum();
        ll += max_lp + z.ln();
    }
    ll / points.len() as f64
}

/// Free parameters of a 2-D full-covariance k-mixture: `6k - 1`
/// (2k means + 3k covariances + k-1 weights).
pub fn gmm_free_parameters(k: usize) -> usize {
    6 * k - 1
}

/// `AIC = 2 nu - 2 LL`.
pub fn aic_score(log_likelihood: f64, k: usize) -> f64 {
    2.0 * gmm_free_parameters(k) as f64 - 2.0 * log_likelihood
}

/// `BIC = nu ln n - 2 LL`.
pub fn bic_score(log_likelihood: f64, k: usize, n: usize) -> f64 {
    gmm_free_parameters(k) as f64 * (n as f64).ln() - 2.0 * log_likelihood
}

/// Model-selection criterion over the component count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionCriterion {
    Aic,
    Bic,
    /// Single holdout split; the given fraction of points is held out and the
    /// mean holdout log-likelihood is maximized.
    HoldoutCv { holdout_fraction: f64 },
}

impl SelectionCriterion {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionCriterion::Aic => "aic",
            SelectionCriterion::Bic => "bic",
            SelectionCriterion::HoldoutCv { .. } => "cv",
        }
    }
}

/// Per-k fit summary retained in the selection result.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub k: usize,
    /// Full-data log-likelihood for AIC/BIC; mean holdout log-likelihood for CV.
    pub log_likelihood: f64,
    pub score: f64,
}

/// Outcome of a model-selection sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelectionResult {
    pub chosen_k: usize,
    pub scores: Vec<ScoreRow>,
    pub wall_time: Duration,
}

/// Sweep k over the range, score each EM fit, and pick the best score
/// (ties break toward smaller k).
pub fn select_k(
    points: &[[f64; 2]],
    k_range: std::ops::RangeInclusive<usize>,
    criterion: SelectionCriterion,
    opts: &EmOptions,
    seed: u64,
) -> Result<ModelSelectionResult> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 1 || hi > 10 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "component range {lo}..={hi} must sit inside 1..=10"
        )));
    }
    let started = Instant::now();
    let n = points.len();

    // For the holdout criterion, split once and reuse across k.
    let (cv_train, cv_holdout) = match criterion {
        SelectionCriterion::HoldoutCv { holdout_fraction } => {
            if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "holdout fraction must lie in (0, 1), got {holdout_fraction}"
                )));
            }
            let holdout_len = ((n as f64) * holdout_fraction).floor() as usize;
            if holdout_len == 0 || holdout_len == n {
                return Err(Error::InvalidArgument(format!(
                    "holdout split is degenerate: {holdout_len} of {n} points"
                )));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut derived_rng(seed, stream::SPLIT, 0));
            let holdout: Vec<[f64; 2]> = order[..holdout_len].iter().map(|&i| points[i]).collect();
            let train: Vec<[f64; 2]> = order[holdout_len..].iter().map(|&i| points[i]).collect();
            (train, holdout)
        }
        _ => (Vec::new(), Vec::new()),
    };

    let mut scores = Vec::new();
    let mut chosen: Option<(usize, f64)> = None;
    for k in lo..=hi {
        let row = match criterion {
            SelectionCriterion::Aic => {
                let fit = em_fit(points, k, opts, seed)?;
                ScoreRow {
                    k,
                    log_likelihood: fit.log_likelihood,
                    score: aic_score(fit.log_likelihood, k),
                }
            }
            SelectionCriterion::Bic => {
                let fit = em_fit(points, k, opts, seed)?;
                ScoreRow {
                    k,
                    log_likelihood: fit.log_likelihood,
                    score: bic_score(fit.log_likelihood, k, n),
                }
            }
            SelectionCriterion::HoldoutCv { .. } => {
                let fit = em_fit(&cv_train, k, opts, seed)?;
                let holdout_ll = gmm_mean_log_likelihood(&fit, &cv_holdout);
                ScoreRow {
                    k,
                    log_likelihood: holdout_ll,
                    score: holdout_ll,
                }
            }
        };
        // AIC/BIC are minimized, CV is maximized; strict improvement keeps
        // the smaller k on ties.
        let better = match chosen {
            None => true,
            Some((_, best)) => match criterion {
                SelectionCriterion::HoldoutCv { .. } => row.score > best,
                _ => row.score < best,
            },
        };
        if better {
            chosen = Some((k, row.score));
        }
        scores.push(row);
    }
    Ok(ModelSelectionResult {
        chosen_k: chosen.expect("nonempty k range").0,
        scores,
        wall_time: started.elapsed(),
    })
}

/// Default termination tolerance for the Dirichlet MLE iteration.
pub const DIRICHLET_MLE_DEFAULT_TOL: f64 = 1e-9;

/// Coordinates are clamped at least this far from zero before taking logs.
pub const SIMPLEX_CLAMP: f64 = 1e-10;

/// Result of the Dirichlet maximum-likelihood iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletMle {
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-coordinate mean of `ln x` over simplex points, the sufficient
/// statistic of the Dirichlet likelihood.
pub fn mean_log_statistics(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no simplex points given".into()));
    }
    let d = points[0].len();
    if d < 2 || points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidArgument(
            "simplex points must share a dimension >= 2".into(),
        ));
    }
    let mut acc = vec![0.0f64; d];
    for p in points {
        for (a, &x) in acc.iter_mut().zip(p) {
            *a += x.max(SIMPLEX_CLAMP).ln();
        }
    }
    for a in &mut acc {
        *a /= points.len() as f64;
    }
    Ok(acc)
}

/// Gradient of the mean log-likelihood in the concentration parameters.
pub fn dirichlet_log_likelihood_gradient(alpha: &[f64], mean_log: &[f64]) -> Vec<f64> {
    let total: f64 = alpha.iter().sum();
    let psi_total = digamma(total);
    alpha
        .iter()
        .zip(mean_log)
        .map(|(&a, &lm)| psi_total - digamma(a) + lm)
        .collect()
}

/// Maximum-likelihood concentrations by the fixed-point update with a Newton
/// polish phase. Returns the last iterate with `converged = false` if the
/// tolerance was not met within the iteration budget.
pub fn dirichlet_mle(points: &[Vec<f64>], max_iters: usize, tol: f64) -> Result<DirichletMle> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "Dirichlet MLE needs at least two points".into(),
        ));
    }
    let mean_log = mean_log_statistics(points)?;
    let d = mean_log.len();
    let n = points.len() as f64;

    // Moment-matching initialization from the first coordinate.
    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j].max(SIMPLEX_CLAMP)).sum::<f64>() / n)
        .collect();
    let m1 = mean[0];
    let e2 = points
        .iter()
        .map(|p| {
            let x = p[0].max(SIMPLEX_CLAMP);
            x * x
        })
        .sum::<f64>()
        / n;
    let var = (e2 - m1 * m1).max(1e-12);
    let total0 = ((m1 * (1.0 - m1)) / var - 1.0).clamp(0.1, 1e6);
    let mut alpha: Vec<f64> = mean
        .iter()
        .map(|&m| (total0 * m).clamp(1e-3, 1e8))
        .collect();

    let mut iterations = 0;
    let mut converged = false;

    // Phase 1: fixed-point updates.
    let fixed_point_budget = max_iters.saturating_mul(3) / 4;
    while iterations < fixed_point_budget {
        iterations += 1;
        let psi_total = digamma(alpha.iter().sum());
        let mut delta = 0.0f64;
        for (a, &lm) in alpha.iter_mut().zip(&mean_log) {
            let next = inverse_digamma(psi_total + lm).clamp(1e-8, 1e12);
            delta = delta.max((next - *a).abs());
            *a = next;
        }
        if delta < tol {
            converged = true;
            break;
        }
    }

    // Phase 2: Newton steps on the structured Hessian.
    while !converged && iterations < max_iters {
        iterations += 1;
        let total: f64 = alpha.iter().sum();
        let grad = dirichlet_log_likelihood_gradient(&alpha, &mean_log);
        let q: Vec<f64> = alpha.iter().map(|&a| -trigamma(a)).collect();
        let c = trigamma(total);
        let inv_q_sum: f64 = q.iter().map(|&qk| 1.0 / qk).sum();
        let b = grad
            .iter()
            .zip(&q)
            .map(|(&g, &qk)| g / qk)
            .sum::<f64>()
            * c
            / (1.0 + c * inv_q_sum);
        let step: Vec<f64> = grad
            .iter()
            .zip(&q)
            .map(|(&g, &qk)| (g - b) / qk)
            .collect();
        let mut scale = 1.0;
        let mut applied = false;
        for _ in 0..40 {
            let candidate: Vec<f64> = alpha
                .iter()
                .zip(&step)
                .map(|(&a, &s)| a - scale * s)
                .collect();
            if candidate.iter().all(|&a| a > 0.0 && a.is_finite()) {
                let delta = candidate
                    .iter()
                    .zip(&alpha)
                    .map(|(n, o)| (n - o).abs())
                    .fold(0.0f64, f64::max);
                alpha = candidate;
                if delta < tol {
                    converged = true;
                }
                applied = true;
                break;
            }
            scale *= 0.5;
        }
        if !applied {
            break;
        }
        if converged {
            break;
        }
    }

    Ok(DirichletMle {
        alpha,
        iterations,
        converged,
    })
}
