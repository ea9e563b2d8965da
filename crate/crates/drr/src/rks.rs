//! Random cosine features whose inner products approximate the RBF kernel
//! `K(x) = exp(-x^2/2)` applied to scaled Euclidean distances.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A frozen random-feature draw: `z(x)_k = sqrt(2/D) cos(w_k . x + b_k)` with
/// `w_k ~ N(0, sigma^-2 I)` and `b_k ~ Unif[0, 2pi)`.
///
/// The draw is a pure function of `(input_dim, feature_count, bandwidth, seed)`;
/// rebuilding from the stored seed reproduces the frequencies and phases
/// bit-exactly, which is what model files rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapSpec {
    input_dim: usize,
    feature_count: usize,
    bandwidth: f64,
    seed: u64,
    frequencies: Array2<f64>,
    phases: Vec<f64>,
}

impl FeatureMapSpec {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `D x S` frequency matrix.
    pub fn frequencies(&self) -> &Array2<f64> {
        &self.frequencies
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// CRC over the little-endian bytes of frequencies then phases; stored in
    /// model files and re-checked after regeneration on load.
    pub fn checksum(&self) -> u32 {
        let mut hasher = crc32fast::Hasher::new();
        for &w in self.frequencies.iter() {
            hasher.update(&w.to_le_bytes());
        }
        for &b in &self.phases {
            hasher.update(&b.to_le_bytes());
        }
        hasher.finalize()
    }
}

/// Draw a feature map. Frequencies are filled row by row (feature-major),
/// then phases, from a single seeded stream.
pub fn draw_feature_map(
    input_dim: usize,
    feature_count: usize,
    bandwidth: f64,
    seed: u64,
) -> Result<FeatureMapSpec> {
    if input_dim == 0 || feature_count == 0 {
        return Err(Error::InvalidArgument(
            "feature map needs input_dim >= 1 and feature_count >= 1".into(),
        ));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be a positive finite real, got {bandwidth}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / bandwidth;
    let mut frequencies = Array2::zeros((feature_count, input_dim));
    for w in frequencies.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *w = g * scale;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let phases: Vec<f64> = (0..feature_count)
        .map(|_| rng.random::<f64>() * two_pi)
        .collect();
    Ok(FeatureMapSpec {
        input_dim,
        feature_count,
        bandwidth,
        seed,
        frequencies,
        phases,
    })
}

/// A single feature vector; entries lie in `[-sqrt(2/D), sqrt(2/D)]` and the
/// Euclidean norm never exceeds `sqrt(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().zip(weights).map(|(a, b)| a * b).sum()
    }
}

pub fn apply_features(spec: &FeatureMapSpec, x: &[f64]) -> Result<FeatureVector> {
    if x.len() != spec.input_dim {
        return Err(Error::InvalidArgument(format!(
            "input length {} does not match feature map input dimension {}",
            x.len(),
            spec.input_dim
        )));
    }
    let amp = (2.0 / spec.feature_count as f64).sqrt();
    let xv = ArrayView1::from(x);
    let mut out = Vec::with_capacity(spec.feature_count);
    for (row, &b) in spec.frequencies.rows().into_iter().zip(&spec.phases) {
        out.push(amp * (row.dot(&xv) + b).cos());
    }
    Ok(FeatureVector(out))
}

/// Batched feature computation: rows of `inputs` map to rows of the output.
pub fn apply_features_matrix(spec: &FeatureMapSpec, inputs: &Array2<f64>) -> Result<Array2<f64>> {
    if inputs.ncols() != spec.input_dim {
        return Err(Error::InvalidArgument(format!(
            "input width {} does not match feature map input dimension {}",
            inputs.ncols(),
            spec.input_dim
        )));
    }
    let amp = (2.0 / spec.feature_count as f64).sqrt();
    let mut projected = inputs.dot(&spec.frequencies.t());
    let phases = Array1::from_vec(spec.phases.clone());
    for mut row in projected.rows_mut() {
        row += &phases;
    }
    projected.mapv_inplace(|v| amp * v.cos());
    Ok(projected)
}

/// `K(||u - v||_2 / sigma)` with `K(x) = exp(-x^2/2)`.
pub fn exact_rbf_kernel(u: &[f64], v: &[f64], bandwidth: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (2.0 * bandwidth * bandwidth)).exp())
}

/// Feature-count rule `max(16, ceil(c n ln n))`.
pub fn choose_feature_count(n: usize, c: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "feature-count rule needs n >= 2, got {n}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "feature-count constant must be positive, got {c}"
        )));
    }
    let raw = (c * n as f64 * (n as f64).ln()).ceil() as usize;
    Ok(raw.max(16))
}
