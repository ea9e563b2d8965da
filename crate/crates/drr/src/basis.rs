//! Tensor-product cosine basis on the unit box, Sobolev-style index-set
//! truncation, and projection-coefficient estimation from raw samples.
//!
//! The one-dimensional family is `phi_0(u) = 1`, `phi_j(u) = sqrt(2) cos(pi j u)`
//! for `j >= 1`, which is orthonormal on `L_2([0, 1])`. Multivariate basis
//! functions are products over coordinates indexed by a multi-index `alpha`.
//! The active set keeps every `alpha` whose weight
//! `kappa_alpha = sqrt(sum_i (nu_i alpha_i)^(2 gamma_i))` stays below a
//! truncation level `t`; its enumeration order is fixed (ascending
//! lexicographic) so that coefficient vectors from different sample sets are
//! always aligned.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::sample::{check_unit_box, SampleSet};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

/// Default cap on the number of bounding-box candidates scanned during
/// index-set enumeration; guards against near-zero smoothness values.
pub const DEFAULT_CANDIDATE_CAP: u64 = 10_000_000;

/// Maximum absolute value of any basis function on the unit interval.
pub const PHI_MAX: f64 = SQRT_2;

/// Smoothness-class configuration: dimension `l`, per-coordinate smoothness
/// `gamma`, per-coordinate scale `nu`, and ellipsoid radius `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisConfig {
    dimension: usize,
    smoothness: Vec<f64>,
    scale: Vec<f64>,
    radius: f64,
}

impl BasisConfig {
    pub fn new(
        dimension: usize,
        smoothness: Vec<f64>,
        scale: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if smoothness.len() != dimension || scale.len() != dimension {
            return Err(Error::InvalidArgument(format!(
                "smoothness/scale must have {dimension} entries, got {}/{}",
                smoothness.len(),
                scale.len()
            )));
        }
        if smoothness.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidArgument(
                "every smoothness entry must be a positive finite real".into(),
            ));
        }
        if scale.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "every scale entry must be a positive finite real".into(),
            ));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(
                "ellipsoid radius must be a positive finite real".into(),
            ));
        }
        Ok(BasisConfig {
            dimension,
            smoothness,
            scale,
            radius,
        })
    }

    /// Same smoothness and scale in every coordinate.
    pub fn isotropic(dimension: usize, smoothness: f64, scale: f64, radius: f64) -> Result<Self> {
        Self::new(
            dimension,
            vec![smoothness; dimension],
            vec![scale; dimension],
            radius,
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn smoothness(&self) -> &[f64] {
        &self.smoothness
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `sum_j 1/gamma_j`, the exponent aggregate entering rate formulas.
    pub fn inverse_smoothness_sum(&self) -> f64 {
        self.smoothness.iter().map(|g| 1.0 / g).sum()
    }
}

/// A multi-index of non-negative per-coordinate frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

/// Ellipsoid weight `kappa_alpha = sqrt(sum_i (nu_i |alpha_i|)^(2 gamma_i))`.
pub fn kappa(config: &BasisConfig, alpha: &MultiIndex) -> f64 {
    let mut acc = 0.0;
    for i in 0..config.dimension {
        let base = config.scale[i] * alpha.0[i] as f64;
        if base > 0.0 {
            acc += base.powf(2.0 * config.smoothness[i]);
        }
    }
    acc.sqrt()
}

/// The truncated index set `M_t` in ascending lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    config: BasisConfig,
    truncation: f64,
    indices: Vec<MultiIndex>,
    max_degree: Vec<u32>,
}

impl MultiIndexSet {
    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Cardinality `S`: the coefficient-vector dimension.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest frequency used along each axis.
    pub fn max_degree(&self) -> &[u32] {
        &self.max_degree
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.indices.binary_search(alpha).is_ok()
    }
}

/// Enumerate `M_t = { alpha : kappa_alpha <= t }` with the default candidate cap.
pub fn enumerate_index_set(config: &BasisConfig, truncation: f64) -> Result<MultiIndexSet> {
    enumerate_index_set_with_cap(config, truncation, DEFAULT_CANDIDATE_CAP)
}

/// Enumeration scans the per-coordinate bounding box
/// `alpha_i <= nu_lam^(-gamma_lam/gamma_i) t^(1/gamma_i)` (with `lam` the
/// coordinate minimizing `nu_i^(2 gamma_i)`) and keeps indices passing the
/// exact `kappa` test.
pub fn enumerate_index_set_with_cap(
    config: &BasisConfig,
    truncation: f64,
    cap: u64,
) -> Result<MultiIndexSet> {
    if !(truncation >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation level must be >= 0, got {truncation}"
        )));
    }
    let l = config.dimension;
    let lam = (0..l)
        .min_by(|&a, &b| {
            let ka = config.scale[a].powf(2.0 * config.smoothness[a]);
            let kb = config.scale[b].powf(2.0 * config.smoothness[b]);
            ka.partial_cmp(&kb).expect("finite scale weights")
        })
        .expect("dimension >= 1");
    let nu_lam = config.scale[lam];
    let gamma_lam = config.smoothness[lam];

    let mut box_bounds = Vec::with_capacity(l);
    let mut candidates: u128 = 1;
    for i in 0..l {
        let bound =
            nu_lam.powf(-gamma_lam / config.smoothness[i]) * truncation.powf(1.0 / config.smoothness[i]);
        // A hair of slack so that exact-integer bounds are not lost to rounding;
        // overshoot is harmless because kappa filters below.
        let b = (bound + 1e-9).floor().max(0.0) as u64;
        candidates = candidates.saturating_mul(b as u128 + 1);
        if candidates > cap as u128 {
            return Err(Error::ResourceLimit { candidates, cap });
        }
        box_bounds.push(b as u32);
    }

    let mut indices = Vec::new();
    let mut alpha = vec![0u32; l];
    'outer: loop {
        let candidate = MultiIndex(alpha.clone());
        if kappa(config, &candidate) <= truncation {
            indices.push(candidate);
        }
        // Odometer increment, rightmost axis fastest: ascending lexicographic.
        for axis in (0..l).rev() {
            if alpha[axis] < box_bounds[axis] {
                alpha[axis] += 1;
                continue 'outer;
            }
            alpha[axis] = 0;
        }
        break;
    }

    let mut max_degree = vec![0u32; l];
    for idx in &indices {
        for (m, &a) in max_degree.iter_mut().zip(idx.components()) {
            *m = (*m).max(a);
        }
    }
    Ok(MultiIndexSet {
        config: config.clone(),
        truncation,
        indices,
        max_degree,
    })
}

/// Truncation-level rule `t = C n^(1/(2 + gamma^-1))`.
pub fn choose_truncation(n: usize, config: &BasisConfig, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be >= 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation constant must be positive, got {c}"
        )));
    }
    let exponent = 1.0 / (2.0 + config.inverse_smoothness_sum());
    Ok(c * (n as f64).powf(exponent))
}

fn phi(j: u32, u: f64) -> f64 {
    if j == 0 {
        1.0
    } else {
        SQRT_2 * (PI * j as f64 * u).cos()
    }
}

/// Evaluate the tensor basis function `phi_alpha` at a unit-box point.
pub fn basis_eval(config: &BasisConfig, alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    if alpha.len() != config.dimension || x.len() != config.dimension {
        return Err(Error::InvalidArgument(format!(
            "index/point dimension must be {}, got {}/{}",
            config.dimension,
            alpha.len(),
            x.len()
        )));
    }
    check_unit_box(x)?;
    let mut prod = 1.0;
    for (&j, &u) in alpha.components().iter().zip(x) {
        prod *= phi(j, u);
    }
    Ok(prod)
}

/// Projection coefficients of one empirical distribution, aligned with a
/// `MultiIndexSet`'s enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    values: Vec<f64>,
    sample_count: usize,
}

impl CoefficientVector {
    pub fn from_parts(values: Vec<f64>, sample_count: usize) -> Self {
        CoefficientVector {
            values,
            sample_count,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }
}

/// Per-axis table of `phi_j(u)` values for every point coordinate, built with
/// the cosine three-term recurrence.
fn axis_tables(samples: &SampleSet, max_degree: &[u32]) -> Vec<Array2<f64>> {
    let n = samples.len();
    let points = samples.points();
    max_degree
        .iter()
        .enumerate()
        .map(|(axis, &deg)| {
            let cols = deg as usize + 1;
            let mut table = Array2::zeros((n, cols));
            for (row, mut out) in table.rows_mut().into_iter().enumerate() {
                let u = points[(row, axis)];
                out[0] = 1.0;
                if cols > 1 {
                    let c1 = (PI * u).cos();
                    let mut prev2 = 1.0; // cos(0)
                    let mut prev1 = c1;
                    out[1] = SQRT_2 * c1;
                    for j in 2..cols {
                        let cj = 2.0 * c1 * prev1 - prev2;
                        prev2 = prev1;
                        prev1 = cj;
                        out[j] = SQRT_2 * cj;
                    }
                }
            }
            table
        })
        .collect()
}

/// Sample-mean estimate of every projection coefficient in `idx`.
pub fn estimate_coefficients(samples: &SampleSet, idx: &MultiIndexSet) -> Result<CoefficientVector> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sample set is empty".into()));
    }
    if idx.is_empty() {
        return Err(Error::InvalidArgument("index set is empty".into()));
    }
    if samples.dimension() != idx.config().dimension() {
        return Err(Error::InvalidArgument(format!(
            "sample dimension {} does not match basis dimension {}",
            samples.dimension(),
            idx.config().dimension()
        )));
    }
    let n = samples.len();
    let tables = axis_tables(samples, idx.max_degree());
    let mut values = Vec::with_capacity(idx.len());
    for alpha in idx.indices() {
        let comps = alpha.components();
        let mut acc = 0.0;
        for row in 0..n {
            let mut prod = 1.0;
            for (axis, &j) in comps.iter().enumerate() {
                prod *= tables[axis][(row, j as usize)];
            }
            acc += prod;
        }
        values.push(acc / n as f64);
    }
    Ok(CoefficientVector {
        values,
        sample_count: n,
    })
}

fn check_alignment(coeffs: &CoefficientVector, idx: &MultiIndexSet) -> Result<()> {
    if coeffs.len() != idx.len() {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector of length {} is not aligned with index set of size {}",
            coeffs.len(),
            idx.len()
        )));
    }
    Ok(())
}

/// Truncated series value `sum_alpha c_alpha phi_alpha(x)`; may be negative.
pub fn eval_density(coeffs: &CoefficientVector, idx: &MultiIndexSet, x: &[f64]) -> Result<f64> {
    check_alignment(coeffs, idx)?;
    let mut acc = 0.0;
    for (c, alpha) in coeffs.values().iter().zip(idx.indices()) {
        acc += c * basis_eval(idx.config(), alpha, x)?;
    }
    Ok(acc)
}

/// Euclidean distance between aligned coefficient vectors. By orthonormality
/// this equals the `L_2` distance between the truncated density estimates.
pub fn l2_distance(
    c1: &CoefficientVector,
    c2: &CoefficientVector,
    idx: &MultiIndexSet,
) -> Result<f64> {
    check_alignment(c1, idx)?;
    check_alignment(c2, idx)?;
    Ok(euclidean(c1.values(), c2.values()))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Trapezoid-grid approximation of `int (p1 - p2)^2` over the unit box.
///
/// Supports `l <= 2` only; this is the quadrature cross-check for the
/// coefficient-space distance, not a production path.
pub fn quadrature_l2(
    idx: &MultiIndexSet,
    c1: &CoefficientVector,
    c2: &CoefficientVector,
    resolution: usize,
) -> Result<f64> {
    check_alignment(c1, idx)?;
    check_alignment(c2, idx)?;
    let l = idx.config().dimension();
    if l > 2 {
        return Err(Error::Unsupported(format!(
            "quadrature_l2 supports dimension <= 2, got {l}"
        )));
    }
    if resolution < 1000 {
        return Err(Error::InvalidArgument(format!(
            "quadrature resolution must be >= 1000 per axis, got {resolution}"
        )));
    }
    let diff: Vec<f64> = c1
        .values()
        .iter()
        .zip(c2.values())
        .map(|(a, b)| a - b)
        .collect();
    let nodes = resolution + 1;
    let grid_table = |axis: usize| -> Array2<f64> {
        let deg = idx.max_degree()[axis] as usize;
        let mut table = Array2::zeros((nodes, deg + 1));
        for i in 0..nodes {
            let u = i as f64 / resolution as f64;
            for j in 0..=deg {
                table[(i, j)] = phi(j as u32, u);
            }
        }
        table
    };
    let h = 1.0 / resolution as f64;
    let weight = |i: usize| if i == 0 || i == resolution { 0.5 } else { 1.0 };
    if l == 1 {
        let t0 = grid_table(0);
        let mut acc = 0.0;
        for i in 0..nodes {
            let mut v = 0.0;
            for (d, alpha) in diff.iter().zip(idx.indices()) {
                v += d * t0[(i, alpha.components()[0] as usize)];
            }
            acc += weight(i) * v * v;
        }
        Ok(acc * h)
    } else {
        let t0 = grid_table(0);
        let t1 = grid_table(1);
        // diff expressed as a (deg0+1) x (deg1+1) coefficient matrix,
        // so the grid evaluation is two matrix products.
        let mut m = Array2::zeros((idx.max_degree()[0] as usize + 1, idx.max_degree()[1] as usize + 1));
        for (d, alpha) in diff.iter().zip(idx.indices()) {
            let c = alpha.components();
            m[(c[0] as usize, c[1] as usize)] += d;
        }
        let u = t0.dot(&m); // nodes x (deg1+1)
        let vals = u.dot(&t1.t()); // nodes x nodes
        let mut acc = 0.0;
        for i in 0..nodes {
            let wi = weight(i);
            for j in 0..nodes {
                let v = vals[(i, j)];
                acc += wi * weight(j) * v * v;
            }
        }
        Ok(acc * h * h)
    }
}

/// Per-coordinate affine map taking raw data coordinates into the unit box.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainTransform {
    bounds: Vec<(f64, f64)>,
}

impl DomainTransform {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument(
                "domain transform needs at least one coordinate".into(),
            ));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {i}: bounds ({lo}, {hi}) must be finite with upper > lower"
                )));
            }
        }
        Ok(DomainTransform { bounds })
    }

    /// The identity map on a unit box of the given dimension.
    pub fn identity(dimension: usize) -> Self {
        DomainTransform {
            bounds: vec![(0.0, 1.0); dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn to_unit(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(raw)?;
        Ok(raw
            .iter()
            .zip(&self.bounds)
            .map(|(&x, &(lo, hi))| (x - lo) / (hi - lo))
            .collect())
    }

    /// Like `to_unit` but clips out-of-range coordinates to the box boundary.
    pub fn to_unit_clipped(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .to_unit(raw)?
            .into_iter()
            .map(|u| u.clamp(0.0, 1.0))
            .collect())
    }

    pub fn from_unit(&self, unit: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(unit)?;
        Ok(unit
            .iter()
            .zip(&self.bounds)
            .map(|(&u, &(lo, hi))| lo + u * (hi - lo))
            .collect())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.bounds.len() {
            return Err(Error::InvalidArgument(format!(
                "point dimension {} does not match transform dimension {}",
                x.len(),
                self.bounds.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Provenance;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn cfg_1d() -> BasisConfig {
        BasisConfig::isotropic(1, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn basis_eval_zero_index_is_one() {
        let v = basis_eval(&cfg_1d(), &MultiIndex::new(vec![0]), &[0.73]).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn basis_eval_first_mode_vanishes_at_half() {
        let v = basis_eval(&cfg_1d(), &MultiIndex::new(vec![1]), &[0.5]).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn basis_eval_tensor_product() {
        let cfg = BasisConfig::isotropic(2, 1.0, 1.0, 1.0).unwrap();
        let v = basis_eval(&cfg, &MultiIndex::new(vec![2, 0]), &[0.0, 0.9]).unwrap();
        assert_abs_diff_eq!(v, SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn basis_eval_rejects_out_of_domain() {
        let err = basis_eval(&cfg_1d(), &MultiIndex::new(vec![1]), &[1.5]);
        assert!(matches!(err, Err(Error::OutOfDomain { index: 0, .. })));
    }

    #[test]
    fn enumerate_1d_linear_weights() {
        let set = enumerate_index_set(&cfg_1d(), 3.5).unwrap();
        let got: Vec<u32> = set.indices().iter().map(|a| a.components()[0]).collect();
        assert_eq!(got, vec![0, 1, 2, 3]);
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn enumerate_2d_matches_brute_force() {
        let cfg = BasisConfig::isotropic(2, 1.0, 1.0, 1.0).unwrap();
        let set = enumerate_index_set(&cfg, 2.0).unwrap();
        let got: Vec<Vec<u32>> = set
            .indices()
            .iter()
            .map(|a| a.components().to_vec())
            .collect();
        // Independent oracle: scan the {0..4}^2 grid and keep indices whose
        // weight passes, in lexicographic order.
        let mut expected = Vec::new();
        for a in 0u32..=4 {
            for b in 0u32..=4 {
                if kappa(&cfg, &MultiIndex::new(vec![a, b])) <= 2.0 {
                    expected.push(vec![a, b]);
                }
            }
        }
        assert_eq!(got, expected);
        assert_eq!(set.len(), 6);
        assert!(expected.contains(&vec![1, 1]) && expected.contains(&vec![0, 2]));
    }

    #[test]
    fn enumerate_t_zero_keeps_only_origin() {
        let set = enumerate_index_set(&cfg_1d(), 0.0).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.indices()[0].is_zero());
    }

    #[test]
    fn enumerate_respects_candidate_cap() {
        let err = enumerate_index_set_with_cap(&cfg_1d(), 1e9, 1000);
        assert!(matches!(err, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn truncation_rule_values() {
        let cfg = BasisConfig::isotropic(1, 2.0, 1.0, 1.0).unwrap();
        // gamma^-1 = 0.5, exponent 0.4: 100^0.4
        assert_abs_diff_eq!(
            choose_truncation(100, &cfg, 1.0).unwrap(),
            6.309573444801933,
            epsilon = 1e-12
        );
        assert_eq!(choose_truncation(1, &cfg, 1.0).unwrap(), 1.0);
        let cfg2 = BasisConfig::isotropic(2, 1.0, 1.0, 1.0).unwrap();
        // gamma^-1 = 2, exponent 1/4: 1024^(1/4) = 2^2.5
        assert_abs_diff_eq!(
            choose_truncation(1024, &cfg2, 1.0).unwrap(),
            5.656854249492381,
            epsilon = 1e-12
        );
    }

    #[test]
    fn coefficients_single_point() {
        let set = enumerate_index_set(&cfg_1d(), 2.0).unwrap();
        let samples =
            SampleSet::from_points(array![[0.5]], Provenance::manual()).unwrap();
        let coeffs = estimate_coefficients(&samples, &set).unwrap();
        // alpha = 2 entry: sqrt(2) cos(pi) = -sqrt(2)
        assert_abs_diff_eq!(coeffs.values()[2], -SQRT_2, epsilon = 1e-12);
        assert_eq!(coeffs.values()[0], 1.0);
    }

    #[test]
    fn coefficients_two_endpoint_samples() {
        let set = enumerate_index_set(&cfg_1d(), 2.0).unwrap();
        let samples =
            SampleSet::from_points(array![[0.0], [1.0]], Provenance::manual()).unwrap();
        let coeffs = estimate_coefficients(&samples, &set).unwrap();
        // (sqrt(2) cos 0 + sqrt(2) cos 2pi) / 2 = sqrt(2)
        assert_abs_diff_eq!(coeffs.values()[2], SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn zero_index_entry_is_exactly_one() {
        let set = enumerate_index_set(&cfg_1d(), 5.0).unwrap();
        let samples = SampleSet::from_points(
            array![[0.11], [0.77], [0.39], [0.95], [0.02], [0.5], [0.63]],
            Provenance::manual(),
        )
        .unwrap();
        let coeffs = estimate_coefficients(&samples, &set).unwrap();
        assert_eq!(coeffs.values()[0], 1.0);
    }

    #[test]
    fn eval_density_uniform_and_vanishing_mode() {
        let set = enumerate_index_set(&cfg_1d(), 1.0).unwrap();
        let uniform = CoefficientVector::from_parts(vec![1.0, 0.0], 1);
        assert_abs_diff_eq!(
            eval_density(&uniform, &set, &[0.42]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let with_mode = CoefficientVector::from_parts(vec![1.0, 0.3], 1);
        assert_abs_diff_eq!(
            eval_density(&with_mode, &set, &[0.5]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn l2_distance_basics() {
        let set = enumerate_index_set(&cfg_1d(), 1.0).unwrap();
        let a = CoefficientVector::from_parts(vec![1.0, 1.0], 1);
        let b = CoefficientVector::from_parts(vec![1.0, 0.0], 1);
        assert_eq!(l2_distance(&a, &a, &set).unwrap(), 0.0);
        assert_abs_diff_eq!(l2_distance(&a, &b, &set).unwrap(), 1.0, epsilon = 1e-15);
        let short = CoefficientVector::from_parts(vec![1.0], 1);
        assert!(matches!(
            l2_distance(&a, &short, &set),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn quadrature_l2_guards() {
        let cfg3 = BasisConfig::isotropic(3, 1.0, 1.0, 1.0).unwrap();
        let set3 = enumerate_index_set(&cfg3, 1.0).unwrap();
        let c = CoefficientVector::from_parts(vec![0.0; set3.len()], 1);
        assert!(matches!(
            quadrature_l2(&set3, &c, &c, 2000),
            Err(Error::Unsupported(_))
        ));
        let set1 = enumerate_index_set(&cfg_1d(), 1.0).unwrap();
        let c1 = CoefficientVector::from_parts(vec![0.0, 0.0], 1);
        assert!(matches!(
            quadrature_l2(&set1, &c1, &c1, 10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn transform_round_trip() {
        let t = DomainTransform::new(vec![(-15.0, 15.0), (2.0, 9.0)]).unwrap();
        let raw = [3.7, 4.2];
        let unit = t.to_unit(&raw).unwrap();
        let back = t.from_unit(&unit).unwrap();
        for (r, b) in raw.iter().zip(&back) {
            assert_abs_diff_eq!(r, b, epsilon = 1e-12 * r.abs().max(1.0));
        }
        assert!(DomainTransform::new(vec![(1.0, 1.0)]).is_err());
    }
}
