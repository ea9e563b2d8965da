//! The double-basis estimator — ridge/OLS regression on random cosine
//! features of projection-coefficient vectors — and the kernel-kernel
//! smoother baseline that keeps the whole training set around.

use ndarray::{Array1, Array2};

use crate::basis::{
    enumerate_index_set, estimate_coefficients, l2_distance, BasisConfig, CoefficientVector,
    DomainTransform, MultiIndexSet,
};
use crate::error::{Error, Result};
use crate::linalg::solve_regularized;
use crate::rks::{apply_features, apply_features_matrix, draw_feature_map, FeatureMapSpec};
use crate::sample::SampleSet;

/// Stationarity tolerance of the normal-equation solver, relative to
/// `1 + ||Z^T Y||_inf`.
pub const SOLVER_TOLERANCE: f64 = 1e-6;

/// Everything needed to fit one double-basis model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub basis: BasisConfig,
    pub truncation: f64,
    pub feature_count: usize,
    pub bandwidth: f64,
    pub lambda: f64,
    pub seed: u64,
    /// Override for the truncation bound `B`; defaults to `max |Y_i|`.
    pub response_bound: Option<f64>,
    pub transform: DomainTransform,
}

/// Provenance recorded with every fitted model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingMetadata {
    pub train_size: usize,
    pub points_per_set: usize,
    pub seed: u64,
    /// Set when an unregularized rank-deficient system was solved by the
    /// minimum-norm pseudo-solution.
    pub min_norm_fallback: bool,
    /// Human-readable note on how hyperparameters were chosen.
    pub selected: Option<String>,
}

/// A fitted double-basis model. Prediction cost does not depend on the
/// number of training instances.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleBasisModel {
    basis: BasisConfig,
    index_set: MultiIndexSet,
    feature_map: FeatureMapSpec,
    weights: Vec<f64>,
    lambda: f64,
    response_bound: f64,
    transform: DomainTransform,
    metadata: TrainingMetadata,
}

impl DoubleBasisModel {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        basis: BasisConfig,
        index_set: MultiIndexSet,
        feature_map: FeatureMapSpec,
        weights: Vec<f64>,
        lambda: f64,
        response_bound: f64,
        transform: DomainTransform,
        metadata: TrainingMetadata,
    ) -> Result<Self> {
        if weights.len() != feature_map.feature_count() {
            return Err(Error::InvalidArgument(format!(
                "weight vector length {} does not match feature count {}",
                weights.len(),
                feature_map.feature_count()
            )));
        }
        if feature_map.input_dim() != index_set.len() {
            return Err(Error::InvalidArgument(format!(
                "feature map input dimension {} does not match index-set cardinality {}",
                feature_map.input_dim(),
                index_set.len()
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ridge parameter must be >= 0, got {lambda}"
            )));
        }
        if !(response_bound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "response bound must be positive, got {response_bound}"
            )));
        }
        Ok(DoubleBasisModel {
            basis,
            index_set,
            feature_map,
            weights,
            lambda,
            response_bound,
            transform,
            metadata,
        })
    }

    pub fn basis(&self) -> &BasisConfig {
        &self.basis
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn feature_map(&self) -> &FeatureMapSpec {
        &self.feature_map
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn response_bound(&self) -> f64 {
        self.response_bound
    }

    pub fn transform(&self) -> &DomainTransform {
        &self.transform
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    /// Record how this model's hyperparameters were chosen.
    pub fn set_selection_note(&mut self, note: String) {
        self.metadata.selected = Some(note);
    }
}

/// `T_B(x) = sign(x) min(|x|, B)`.
pub fn truncate_response(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}

/// The assembled regression design: rows are feature vectors of training
/// coefficient vectors, paired with the responses.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMatrix {
    pub features: Array2<f64>,
    pub responses: Vec<f64>,
}

/// Build the design matrix for a dataset under a fixed index set and map.
pub fn build_training_matrix(
    data: &[(SampleSet, f64)],
    idx: &MultiIndexSet,
    map: &FeatureMapSpec,
) -> Result<TrainingMatrix> {
    let coeffs = coefficient_rows(data.iter().map(|(s, _)| s), data.len(), idx)?;
    let features = apply_features_matrix(map, &coeffs)?;
    Ok(TrainingMatrix {
        features,
        responses: data.iter().map(|(_, y)| *y).collect(),
    })
}

fn coefficient_rows<'a>(
    sets: impl Iterator<Item = &'a SampleSet>,
    count: usize,
    idx: &MultiIndexSet,
) -> Result<Array2<f64>> {
    let mut rows = Array2::zeros((count, idx.len()));
    let mut seen = 0;
    for (i, set) in sets.enumerate() {
        let c = estimate_coefficients(set, idx)?;
        rows.row_mut(i).assign(&Array1::from_vec(c.values().to_vec()));
        seen += 1;
    }
    debug_assert_eq!(seen, count);
    Ok(rows)
}

fn check_responses<'a>(values: impl Iterator<Item = &'a f64>) -> Result<f64> {
    let mut max_abs = 0.0f64;
    for &y in values {
        if !y.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite response {y} in training data"
            )));
        }
        max_abs = max_abs.max(y.abs());
    }
    Ok(max_abs)
}

/// Solve `min ||y - Z w||^2 + lambda ||w||^2` through the regularized normal
/// equations (the production solver behind `fit_double_basis`). Returns the
/// weights and whether the minimum-norm fallback was taken.
pub fn solve_normal_equations(
    features: &Array2<f64>,
    responses: &[f64],
    lambda: f64,
) -> Result<(Vec<f64>, bool)> {
    if features.nrows() != responses.len() {
        return Err(Error::InvalidArgument(format!(
            "feature rows {} do not match response count {}",
            features.nrows(),
            responses.len()
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ridge parameter must be >= 0, got {lambda}"
        )));
    }
    check_responses(responses.iter())?;
    let gram = features.t().dot(features);
    let y = Array1::from_vec(responses.to_vec());
    let rhs = vec![features.t().dot(&y)];
    let solve = solve_regularized(&gram, &rhs, lambda, SOLVER_TOLERANCE)?;
    Ok((
        solve.solutions.into_iter().next().expect("one rhs").to_vec(),
        solve.min_norm_fallback,
    ))
}

/// Fit the double-basis estimator (`lambda = 0` gives plain least squares).
pub fn fit_double_basis(data: &[(SampleSet, f64)], cfg: &FitConfig) -> Result<DoubleBasisModel> {
    let multi: Vec<(SampleSet, Vec<f64>)> = data
        .iter()
        .map(|(s, y)| (s.clone(), vec![*y]))
        .collect();
    let mut models = fit_double_basis_multi(&multi, cfg)?;
    Ok(models.pop().expect("one model per response coordinate"))
}

/// Fit one model per response coordinate, sharing the index set, feature map,
/// and Gram factorization across outputs.
pub fn fit_double_basis_multi(
    data: &[(SampleSet, Vec<f64>)],
    cfg: &FitConfig,
) -> Result<Vec<DoubleBasisModel>> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if !(cfg.lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ridge parameter must be >= 0, got {}",
            cfg.lambda
        )));
    }
    let response_dim = data[0].1.len();
    if response_dim == 0 || data.iter().any(|(_, y)| y.len() != response_dim) {
        return Err(Error::InvalidArgument(
            "responses must be nonempty and of uniform length".into(),
        ));
    }
    let idx = enumerate_index_set(&cfg.basis, cfg.truncation)?;
    let map = draw_feature_map(idx.len(), cfg.feature_count, cfg.bandwidth, cfg.seed)?;
    let coeffs = coefficient_rows(data.iter().map(|(s, _)| s), data.len(), &idx)?;
    let z = apply_features_matrix(&map, &coeffs)?;
    let gram = z.t().dot(&z);

    let mut rhs = Vec::with_capacity(response_dim);
    let mut bounds = Vec::with_capacity(response_dim);
    for out in 0..response_dim {
        let max_abs = check_responses(data.iter().map(|(_, y)| &y[out]))?;
        let y = Array1::from_iter(data.iter().map(|(_, y)| y[out]));
        rhs.push(z.t().dot(&y));
        let bound = cfg
            .response_bound
            .unwrap_or(max_abs)
            .max(f64::MIN_POSITIVE);
        bounds.push(bound);
    }

    let solve = solve_regularized(&gram, &rhs, cfg.lambda, SOLVER_TOLERANCE)?;
    let metadata = TrainingMetadata {
        train_size: data.len(),
        points_per_set: data[0].0.len(),
        seed: cfg.seed,
        min_norm_fallback: solve.min_norm_fallback,
        selected: None,
    };
    solve
        .solutions
        .into_iter()
        .zip(bounds)
        .map(|(w, bound)| {
            DoubleBasisModel::from_parts(
                cfg.basis.clone(),
                idx.clone(),
                map.clone(),
                w.to_vec(),
                cfg.lambda,
                bound,
                cfg.transform.clone(),
                metadata.clone(),
            )
        })
        .collect()
}

/// Truncated prediction `T_B(psi . z(a_t(P)))` for a new sample set.
pub fn predict(model: &DoubleBasisModel, samples: &SampleSet) -> Result<f64> {
    let raw = predict_raw(model, samples)?;
    Ok(truncate_response(raw, model.response_bound))
}

/// Prediction without the truncation operator.
pub fn predict_raw(model: &DoubleBasisModel, samples: &SampleSet) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sample set is empty".into()));
    }
    let coeffs = estimate_coefficients(samples, &model.index_set)?;
    let features = apply_features(&model.feature_map, coeffs.values())?;
    Ok(features.dot(&model.weights))
}

/// Smoothing-kernel profile for the kernel-kernel baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KernelKind {
    /// `K(x) = exp(-x^2/2)`.
    Rbf,
    /// Epanechnikov profile `K(x) = 0.75 (1 - x^2)` on `|x| <= 1`, zero outside.
    BoundedSupport,
}

impl KernelKind {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            KernelKind::Rbf => (-0.5 * x * x).exp(),
            KernelKind::BoundedSupport => {
                if x.abs() <= 1.0 {
                    0.75 * (1.0 - x * x)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::BoundedSupport => "bounded",
        }
    }
}

/// The kernel-kernel smoother: keeps every training coefficient vector and
/// response; each prediction is a weighted average over all of them, so
/// evaluation cost grows linearly with the training size.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelKernelModel {
    basis: BasisConfig,
    index_set: MultiIndexSet,
    coefficients: Vec<CoefficientVector>,
    responses: Vec<f64>,
    bandwidth: f64,
    kind: KernelKind,
    transform: DomainTransform,
    metadata: TrainingMetadata,
}

impl KernelKernelModel {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        basis: BasisConfig,
        index_set: MultiIndexSet,
        coefficients: Vec<CoefficientVector>,
        responses: Vec<f64>,
        bandwidth: f64,
        kind: KernelKind,
        transform: DomainTransform,
        metadata: TrainingMetadata,
    ) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() != responses.len() {
            return Err(Error::InvalidArgument(
                "kernel-kernel model needs equal nonzero numbers of coefficient vectors and responses"
                    .into(),
            ));
        }
        if coefficients.iter().any(|c| c.len() != index_set.len()) {
            return Err(Error::InvalidArgument(
                "stored coefficient vectors are not aligned with the index set".into(),
            ));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KernelKernelModel {
            basis,
            index_set,
            coefficients,
            responses,
            bandwidth,
            kind,
            transform,
            metadata,
        })
    }

    pub fn basis(&self) -> &BasisConfig {
        &self.basis
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &[CoefficientVector] {
        &self.coefficients
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn transform(&self) -> &DomainTransform {
        &self.transform
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    /// Record how this model's hyperparameters were chosen.
    pub fn set_selection_note(&mut self, note: String) {
        self.metadata.selected = Some(note);
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Store the training set as coefficient vectors; no weights are fitted.
/// Duplicate sample sets are kept verbatim.
pub fn kk_fit(
    data: &[(SampleSet, f64)],
    basis: &BasisConfig,
    truncation: f64,
    bandwidth: f64,
    kind: KernelKind,
    transform: DomainTransform,
    seed: u64,
) -> Result<KernelKernelModel> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    check_responses(data.iter().map(|(_, y)| y))?;
    let idx = enumerate_index_set(basis, truncation)?;
    let coefficients = data
        .iter()
        .map(|(s, _)| estimate_coefficients(s, &idx))
        .collect::<Result<Vec<_>>>()?;
    let metadata = TrainingMetadata {
        train_size: data.len(),
        points_per_set: data[0].0.len(),
        seed,
        min_norm_fallback: false,
        selected: None,
    };
    KernelKernelModel::from_parts(
        basis.clone(),
        idx,
        coefficients,
        data.iter().map(|(_, y)| *y).collect(),
        bandwidth,
        kind,
        transform,
        metadata,
    )
}

/// Nadaraya-Watson style prediction: kernel weights over the distances
/// between the query coefficient vector and every stored one. Returns zero
/// when the weight normalizer vanishes.
pub fn kk_predict(model: &KernelKernelModel, samples: &SampleSet) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sample set is empty".into()));
    }
    let query = estimate_coefficients(samples, &model.index_set)?;
    kk_predict_from_coeffs(model, &query)
}

pub(crate) fn kk_predict_from_coeffs(
    model: &KernelKernelModel,
    query: &CoefficientVector,
) -> Result<f64> {
    let mut numerator = 0.0;
    let mut normalizer = 0.0;
    for (stored, &y) in model.coefficients.iter().zip(&model.responses) {
        let d = l2_distance(stored, query, &model.index_set)?;
        let w = model.kind.eval(d / model.bandwidth);
        numerator += w * y;
        normalizer += w;
    }
    if normalizer > 0.0 {
        Ok(numerator / normalizer)
    } else {
        Ok(0.0)
    }
}

/// Grid of double-basis hyperparameters; iterated in declaration order
/// (truncation, feature count, bandwidth, lambda), first-in-grid winning ties.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub truncation: Vec<f64>,
    pub feature_count: Vec<usize>,
    pub bandwidth: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// The chosen grid point and its validation score.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedHyper {
    pub truncation: f64,
    pub feature_count: usize,
    pub bandwidth: f64,
    pub lambda: f64,
    pub validation_mse: f64,
}

/// Grid search minimizing validation mean squared error of the truncated
/// predictor. Splits must be disjoint (caller's responsibility).
pub fn select_hyperparameters(
    train: &[(SampleSet, f64)],
    validation: &[(SampleSet, f64)],
    grid: &HyperGrid,
    base: &FitConfig,
) -> Result<SelectedHyper> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument("validation split is empty".into()));
    }
    if train.is_empty() {
        return Err(Error::InvalidArgument("training split is empty".into()));
    }
    if grid.truncation.is_empty()
        || grid.feature_count.is_empty()
        || grid.bandwidth.is_empty()
        || grid.lambda.is_empty()
    {
        return Err(Error::InvalidArgument(
            "every hyperparameter grid must be nonempty".into(),
        ));
    }
    let mut best: Option<SelectedHyper> = None;
    for &t in &grid.truncation {
        let idx = enumerate_index_set(&base.basis, t)?;
        let train_coeffs = coefficient_rows(train.iter().map(|(s, _)| s), train.len(), &idx)?;
        let valid_coeffs =
            coefficient_rows(validation.iter().map(|(s, _)| s), validation.len(), &idx)?;
        let y_train = Array1::from_iter(train.iter().map(|(_, y)| *y));
        let max_abs = check_responses(train.iter().map(|(_, y)| y))?;
        let bound = base.response_bound.unwrap_or(max_abs).max(f64::MIN_POSITIVE);
        for &d in &grid.feature_count {
            for &sigma in &grid.bandwidth {
                let map = draw_feature_map(idx.len(), d, sigma, base.seed)?;
                let z = apply_features_matrix(&map, &train_coeffs)?;
                let zv = apply_features_matrix(&map, &valid_coeffs)?;
                let gram = z.t().dot(&z);
                let rhs = vec![z.t().dot(&y_train)];
                for &lambda in &grid.lambda {
                    let solve = solve_regularized(&gram, &rhs, lambda, SOLVER_TOLERANCE)?;
                    let w = &solve.solutions[0];
                    let preds = zv.dot(w);
                    let mse = validation
                        .iter()
                        .zip(preds.iter())
                        .map(|((_, y), &p)| {
                            let e = truncate_response(p, bound) - y;
                            e * e
                        })
                        .sum::<f64>()
                        / validation.len() as f64;
                    let better = match &best {
                        None => true,
                        Some(b) => mse < b.validation_mse,
                    };
                    if better {
                        best = Some(SelectedHyper {
                            truncation: t,
                            feature_count: d,
                            bandwidth: sigma,
                            lambda,
                            validation_mse: mse,
                        });
                    }
                }
            }
        }
    }
    Ok(best.expect("nonempty grids produce at least one candidate"))
}

/// Bandwidth selection for the kernel-kernel smoother on a validation split.
pub fn select_kk_bandwidth(
    train: &[(SampleSet, f64)],
    validation: &[(SampleSet, f64)],
    bandwidths: &[f64],
    kind: KernelKind,
    basis: &BasisConfig,
    truncation: f64,
    transform: &DomainTransform,
    seed: u64,
) -> Result<(f64, f64)> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument("validation split is empty".into()));
    }
    if bandwidths.is_empty() {
        return Err(Error::InvalidArgument("bandwidth grid is empty".into()));
    }
    let idx = enumerate_index_set(basis, truncation)?;
    let valid_coeffs: Vec<CoefficientVector> = validation
        .iter()
        .map(|(s, _)| estimate_coefficients(s, &idx))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, f64)> = None;
    for &bw in bandwidths {
        let model = kk_fit(train, basis, truncation, bw, kind, transform.clone(), seed)?;
        let mse = validation
            .iter()
            .zip(&valid_coeffs)
            .map(|((_, y), c)| {
                let p = kk_predict_from_coeffs(&model, c).expect("aligned coefficients");
                (p - y) * (p - y)
            })
            .sum::<f64>()
            / validation.len() as f64;
        if best.map_or(true, |(_, b)| mse < b) {
            best = Some((bw, mse));
        }
    }
    Ok(best.expect("nonempty bandwidth grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Provenance;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng as _;

    fn unit_samples(points: &[f64]) -> SampleSet {
        let rows: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        SampleSet::from_rows(&rows, Provenance::manual()).unwrap()
    }

    fn tiny_config(lambda: f64, seed: u64) -> FitConfig {
        FitConfig {
            basis: BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap(),
            truncation: 3.0,
            feature_count: 8,
            bandwidth: 1.0,
            lambda,
            seed,
            response_bound: None,
            transform: DomainTransform::identity(1),
        }
    }

    fn random_training(n: usize, seed: u64) -> Vec<(SampleSet, f64)> {
        let mut rng = crate::rng::rng_from_seed(seed);
        (0..n)
            .map(|_| {
                let pts: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
                let y = rng.random::<f64>() * 4.0 - 2.0;
                (unit_samples(&pts), y)
            })
            .collect()
    }

    #[test]
    fn hand_solved_ridge_system() {
        // Z = (1, 1)^T, Y = (1, 1), lambda = 2: psi = (2 + 2)^-1 * 2 = 0.5.
        let gram = array![[2.0]];
        let rhs = vec![array![2.0]];
        let out = solve_regularized(&gram, &rhs, 2.0, SOLVER_TOLERANCE).unwrap();
        assert_abs_diff_eq!(out.solutions[0][0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn exact_interpolation_recovers_weights() {
        // Build Y = Z beta* on a full-rank system and refit with lambda = 0.
        let data = random_training(60, 3);
        let cfg = tiny_config(0.0, 17);
        let idx = enumerate_index_set(&cfg.basis, cfg.truncation).unwrap();
        let map = draw_feature_map(idx.len(), cfg.feature_count, cfg.bandwidth, cfg.seed).unwrap();
        let design = build_training_matrix(&data, &idx, &map).unwrap();
        let beta_star: Vec<f64> = (0..cfg.feature_count).map(|i| (i as f64) - 3.5).collect();
        let relabeled: Vec<(SampleSet, f64)> = data
            .iter()
            .enumerate()
            .map(|(i, (s, _))| {
                let y: f64 = design
                    .features
                    .row(i)
                    .iter()
                    .zip(&beta_star)
                    .map(|(z, b)| z * b)
                    .sum();
                (s.clone(), y)
            })
            .collect();
        let model = fit_double_basis(&relabeled, &cfg).unwrap();
        for (w, b) in model.weights().iter().zip(&beta_star) {
            assert_abs_diff_eq!(w, b, epsilon = 1e-8 * b.abs().max(1.0));
        }
        assert!(!model.metadata().min_norm_fallback);
    }

    #[test]
    fn ols_is_ridge_at_lambda_zero() {
        let data = random_training(50, 4);
        let a = fit_double_basis(&data, &tiny_config(0.0, 9)).unwrap();
        let b = fit_double_basis(&data, &tiny_config(0.0, 9)).unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn training_matrix_rows_match_single_path() {
        let data = random_training(10, 5);
        let cfg = tiny_config(0.1, 2);
        let idx = enumerate_index_set(&cfg.basis, cfg.truncation).unwrap();
        let map = draw_feature_map(idx.len(), cfg.feature_count, cfg.bandwidth, cfg.seed).unwrap();
        let design = build_training_matrix(&data, &idx, &map).unwrap();
        for (i, (s, _)) in data.iter().enumerate() {
            let c = estimate_coefficients(s, &idx).unwrap();
            let z = apply_features(&map, c.values()).unwrap();
            for (a, b) in z.values().iter().zip(design.features.row(i)) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn prediction_is_truncated() {
        let cfg = tiny_config(0.0, 1);
        let idx = enumerate_index_set(&cfg.basis, cfg.truncation).unwrap();
        let map = draw_feature_map(idx.len(), 4, 1.0, 1).unwrap();
        let meta = TrainingMetadata {
            train_size: 1,
            points_per_set: 1,
            seed: 1,
            min_norm_fallback: false,
            selected: None,
        };
        let zero = DoubleBasisModel::from_parts(
            cfg.basis.clone(),
            idx.clone(),
            map.clone(),
            vec![0.0; 4],
            0.0,
            5.0,
            DomainTransform::identity(1),
            meta.clone(),
        )
        .unwrap();
        let s = unit_samples(&[0.4]);
        assert_eq!(predict(&zero, &s).unwrap(), 0.0);

        // Scale weights so the raw score overshoots the bound in both signs.
        let s_probe = unit_samples(&[0.3]);
        let probe = DoubleBasisModel::from_parts(
            cfg.basis.clone(),
            idx.clone(),
            map.clone(),
            vec![1.0; 4],
            0.0,
            5.0,
            DomainTransform::identity(1),
            meta.clone(),
        )
        .unwrap();
        let raw = predict_raw(&probe, &s_probe).unwrap();
        assert!(raw.abs() > 1e-9);
        let scale = 7.2 / raw;
        for sign in [1.0, -1.0] {
            let m = DoubleBasisModel::from_parts(
                cfg.basis.clone(),
                idx.clone(),
                map.clone(),
                vec![sign * scale; 4],
                0.0,
                5.0,
                DomainTransform::identity(1),
                meta.clone(),
            )
            .unwrap();
            assert_abs_diff_eq!(
                predict_raw(&m, &s_probe).unwrap(),
                sign * 7.2,
                epsilon = 1e-9
            );
            assert_eq!(predict(&m, &s_probe).unwrap(), sign * 5.0);
        }
    }

    #[test]
    fn kk_two_point_hand_weights() {
        // Distances (0, 2) under sigma = 1, responses (1, -1):
        // prediction = (1 - e^-2) / (1 + e^-2) = tanh(1).
        let basis = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let idx = enumerate_index_set(&basis, 1.0).unwrap();
        let meta = TrainingMetadata {
            train_size: 2,
            points_per_set: 1,
            seed: 0,
            min_norm_fallback: false,
            selected: None,
        };
        let stored = vec![
            CoefficientVector::from_parts(vec![1.0, 0.0], 1),
            CoefficientVector::from_parts(vec![1.0, 2.0], 1),
        ];
        let model = KernelKernelModel::from_parts(
            basis,
            idx,
            stored,
            vec![1.0, -1.0],
            1.0,
            KernelKind::Rbf,
            DomainTransform::identity(1),
            meta,
        )
        .unwrap();
        let query = CoefficientVector::from_parts(vec![1.0, 0.0], 1);
        let p = kk_predict_from_coeffs(&model, &query).unwrap();
        assert_abs_diff_eq!(p, 0.7615941559557649, epsilon = 1e-12);
    }

    #[test]
    fn kk_zero_normalizer_returns_zero() {
        let basis = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let idx = enumerate_index_set(&basis, 1.0).unwrap();
        let meta = TrainingMetadata {
            train_size: 1,
            points_per_set: 1,
            seed: 0,
            min_norm_fallback: false,
            selected: None,
        };
        let stored = vec![CoefficientVector::from_parts(vec![1.0, 2.0], 1)];
        let model = KernelKernelModel::from_parts(
            basis,
            idx,
            stored,
            vec![10.0],
            0.5,
            KernelKind::BoundedSupport,
            DomainTransform::identity(1),
            meta,
        )
        .unwrap();
        // Distance 2 with bandwidth 0.5 is far outside the kernel support.
        let query = CoefficientVector::from_parts(vec![1.0, 0.0], 1);
        assert_eq!(kk_predict_from_coeffs(&model, &query).unwrap(), 0.0);
    }

    #[test]
    fn kk_fit_stores_everything_verbatim() {
        let single = random_training(1, 6);
        let basis1 = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let one = kk_fit(
            &single,
            &basis1,
            2.0,
            1.0,
            KernelKind::Rbf,
            DomainTransform::identity(1),
            0,
        )
        .unwrap();
        assert_eq!(one.len(), 1);

        let data = random_training(5, 6);
        let mut with_dup = data.clone();
        with_dup.push(data[0].clone());
        let basis = BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap();
        let model = kk_fit(
            &with_dup,
            &basis,
            2.0,
            1.0,
            KernelKind::Rbf,
            DomainTransform::identity(1),
            0,
        )
        .unwrap();
        assert_eq!(model.len(), 6);
        assert_eq!(model.coefficients()[0], model.coefficients()[5]);
    }

    #[test]
    fn selection_prefers_lower_validation_mse() {
        let train = random_training(40, 7);
        // Label with a smooth function of the first coefficient so that some
        // lambda separates the grid points.
        let idx = enumerate_index_set(&tiny_config(0.0, 0).basis, 3.0).unwrap();
        let labeled: Vec<(SampleSet, f64)> = train
            .iter()
            .map(|(s, _)| {
                let c = estimate_coefficients(s, &idx).unwrap();
                (s.clone(), c.values()[1])
            })
            .collect();
        let (fit, valid) = labeled.split_at(30);
        let grid = HyperGrid {
            truncation: vec![3.0],
            feature_count: vec![16],
            bandwidth: vec![1.0],
            lambda: vec![0.0, 1e4],
        };
        let sel =
            select_hyperparameters(fit, valid, &grid, &tiny_config(0.0, 13)).unwrap();
        assert_eq!(sel.lambda, 0.0);
        let rerun =
            select_hyperparameters(fit, valid, &grid, &tiny_config(0.0, 13)).unwrap();
        assert_eq!(sel, rerun);

        let singleton = HyperGrid {
            truncation: vec![2.0],
            feature_count: vec![8],
            bandwidth: vec![0.7],
            lambda: vec![0.5],
        };
        let only = select_hyperparameters(fit, valid, &singleton, &tiny_config(0.0, 13)).unwrap();
        assert_eq!(only.lambda, 0.5);
        assert_eq!(only.feature_count, 8);

        assert!(select_hyperparameters(fit, &[], &grid, &tiny_config(0.0, 13)).is_err());
    }

    #[test]
    fn non_finite_response_is_rejected() {
        let mut data = random_training(5, 8);
        data[2].1 = f64::NAN;
        let err = fit_double_basis(&data, &tiny_config(0.1, 3));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
