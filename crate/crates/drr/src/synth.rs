//! Seeded generators for the three experiment families (synthetic smooth
//! mapping, GMM component counts, Dirichlet parameters) and numerical
//! evaluation of the ground-truth mapping.

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::basis::DomainTransform;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::rng::{derived_rng, rng_from_seed, stream, Rng};
use crate::sample::{Provenance, SampleSet};
use crate::special::{norm_cdf, norm_pdf};

/// Range of the per-component variance parameter for truncated Gaussian
/// mixtures (the standard deviation is its square root).
pub const TRUNC_GAUSS_VARIANCE_RANGE: (f64, f64) = (0.05, 0.1);

/// Range of ground-truth mixture weights.
pub const THETA_RANGE: (f64, f64) = (-5.0, 5.0);

/// Number of kernel components in the ground-truth mapping.
pub const GROUND_TRUTH_COMPONENTS: usize = 10;

/// Range of Dirichlet concentration parameters.
pub const DIRICHLET_ALPHA_RANGE: (f64, f64) = (0.1, 10.0);

/// Raw GMM samples live (essentially) inside this box; the fixed affine map
/// to the unit square clips the negligible mass outside.
pub const GMM_RAW_BOUND: f64 = 15.0;

fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// One Gaussian truncated to `[0, 1]`, stored with its truncation mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncGaussComponent {
    mean: f64,
    std_dev: f64,
    mass: f64,
}

impl TruncGaussComponent {
    pub fn new(mean: f64, std_dev: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mean) {
            return Err(Error::InvalidArgument(format!(
                "component mean must lie in [0, 1], got {mean}"
            )));
        }
        if !(std_dev > 0.0) || !std_dev.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "component standard deviation must be positive, got {std_dev}"
            )));
        }
        let mass = norm_cdf((1.0 - mean) / std_dev) - norm_cdf(-mean / std_dev);
        Ok(TruncGaussComponent {
            mean,
            std_dev,
            mass,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev;
        norm_pdf(z) / (self.std_dev * self.mass)
    }
}

/// Equal-weight mixture of two truncated Gaussians on the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncGaussMixture {
    components: [TruncGaussComponent; 2],
}

impl TruncGaussMixture {
    pub fn new(a: TruncGaussComponent, b: TruncGaussComponent) -> Self {
        TruncGaussMixture { components: [a, b] }
    }

    pub fn components(&self) -> &[TruncGaussComponent; 2] {
        &self.components
    }

    /// Density at `x` in `[0, 1]`; integrates to one over the interval.
    pub fn pdf(&self, x: f64) -> f64 {
        0.5 * self.components[0].pdf(x) + 0.5 * self.components[1].pdf(x)
    }

    fn sample_one(&self, rng: &mut Rng) -> f64 {
        let comp = &self.components[usize::from(rng.random::<f64>() >= 0.5)];
        // Rejection from the untruncated normal; acceptance stays near or
        // above one half for the configured parameter ranges.
        loop {
            let g: f64 = rng.sample(StandardNormal);
            let x = comp.mean + comp.std_dev * g;
            if (0.0..=1.0).contains(&x) {
                return x;
            }
        }
    }
}

/// Draw a random mixture: means uniform on `[0, 1]`, variance parameters
/// uniform on the configured range.
pub fn draw_trunc_gauss_mixture(rng: &mut Rng) -> TruncGaussMixture {
    let (vlo, vhi) = TRUNC_GAUSS_VARIANCE_RANGE;
    let mut comp = || {
        let mean = rng.random::<f64>();
        let var = uniform(rng, vlo, vhi);
        TruncGaussComponent::new(mean, var.sqrt()).expect("drawn parameters are valid")
    };
    TruncGaussMixture::new(comp(), comp())
}

/// `n` draws from the mixture, as a one-dimensional sample set.
pub fn sample_trunc_gauss_mixture(p: &TruncGaussMixture, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut points = Array2::zeros((n, 1));
    for i in 0..n {
        points[(i, 0)] = p.sample_one(&mut rng);
    }
    SampleSet::from_points(
        points,
        Provenance {
            generator: "trunc-gauss-mixture".into(),
            seed,
            index: 0,
        },
    )
}

/// The random smooth mapping `f(P) = sum_i theta_i K_sigma(||g_i - p||_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMap {
    pub weights: Vec<f64>,
    pub anchors: Vec<TruncGaussMixture>,
    pub bandwidth: f64,
}

impl GroundTruthMap {
    /// `sum |theta_i|`, a proxy for the mapping-class bound.
    pub fn weight_l1(&self) -> f64 {
        self.weights.iter().map(|t| t.abs()).sum()
    }
}

/// Draw the ten-component ground-truth mapping with unit kernel bandwidth.
pub fn draw_ground_truth(seed: u64) -> GroundTruthMap {
    let mut rng = derived_rng(seed, stream::GROUND_TRUTH, 0);
    let mut weights = Vec::with_capacity(GROUND_TRUTH_COMPONENTS);
    let mut anchors = Vec::with_capacity(GROUND_TRUTH_COMPONENTS);
    for _ in 0..GROUND_TRUTH_COMPONENTS {
        weights.push(uniform(&mut rng, THETA_RANGE.0, THETA_RANGE.1));
        anchors.push(draw_trunc_gauss_mixture(&mut rng));
    }
    GroundTruthMap {
        weights,
        anchors,
        bandwidth: 1.0,
    }
}

/// Squared `L_2` distance between two mixtures by adaptive quadrature.
pub fn mixture_l2_sq(g: &TruncGaussMixture, p: &TruncGaussMixture, abs_tol: f64) -> Result<f64> {
    adaptive_simpson(
        |x| {
            let d = g.pdf(x) - p.pdf(x);
            d * d
        },
        0.0,
        1.0,
        abs_tol,
        40,
    )
}

/// Evaluate the ground-truth mapping at a mixture input; kernel distances are
/// computed numerically to absolute tolerance 1e-8.
pub fn eval_f_true(map: &GroundTruthMap, p: &TruncGaussMixture) -> Result<f64> {
    let two_sigma_sq = 2.0 * map.bandwidth * map.bandwidth;
    let mut acc = 0.0;
    for (theta, g) in map.weights.iter().zip(&map.anchors) {
        let d2 = mixture_l2_sq(g, p, 1e-8)?.max(0.0);
        acc += theta * (-d2 / two_sigma_sq).exp();
    }
    Ok(acc)
}

/// One component of a 2-D Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmComponent {
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

impl GmmComponent {
    /// Eigenvalues of the (symmetric 2x2) covariance.
    pub fn covariance_eigenvalues(&self) -> (f64, f64) {
        let [[a, b], [_, d]] = self.covariance;
        let tr = a + d;
        let det = a * d - b * b;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }
}

/// A random GMM parameter set; component weights are uniform `1/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmSpec {
    pub components: Vec<GmmComponent>,
}

impl GmmSpec {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        vec![1.0 / self.k() as f64; self.k()]
    }
}

/// Draw a spec with `k` uniform on `{1, ..., 10}`.
pub fn draw_gmm(seed: u64) -> GmmSpec {
    let mut rng = rng_from_seed(seed);
    let k = rng.random_range(1..=10);
    draw_gmm_components(&mut rng, k)
}

/// Component recipe: means uniform on `[-5, 5]^2`, covariance
/// `a^2 A A^T + B` with `a ~ U[1, 2]`, `A` entries `U[-1, 1]`, `B` diagonal
/// with entries `U[0, 1]`.
pub fn draw_gmm_components(rng: &mut Rng, k: usize) -> GmmSpec {
    let components = (0..k)
        .map(|_| {
            let mean = [uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0)];
            let a = uniform(rng, 1.0, 2.0);
            let m = [
                [uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)],
                [uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)],
            ];
            let b = [uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)];
            let a2 = a * a;
            let covariance = [
                [
                    a2 * (m[0][0] * m[0][0] + m[0][1] * m[0][1]) + b[0],
                    a2 * (m[0][0] * m[1][0] + m[0][1] * m[1][1]),
                ],
                [
                    a2 * (m[0][0] * m[1][0] + m[0][1] * m[1][1]),
                    a2 * (m[1][0] * m[1][0] + m[1][1] * m[1][1]) + b[1],
                ],
            ];
            GmmComponent { mean, covariance }
        })
        .collect();
    GmmSpec { components }
}

/// The fixed affine map from raw GMM coordinates to the unit square.
pub fn gmm_domain_transform() -> DomainTransform {
    DomainTransform::new(vec![(-GMM_RAW_BOUND, GMM_RAW_BOUND); 2])
        .expect("static bounds are valid")
}

/// Draw one raw (untransformed) point from the mixture.
pub fn sample_gmm_raw(spec: &GmmSpec, rng: &mut Rng) -> [f64; 2] {
    let comp = &spec.components[rng.random_range(0..spec.k())];
    let [[s11, s12], [_, s22]] = comp.covariance;
    // 2x2 Cholesky factor.
    let l11 = s11.sqrt();
    let l21 = s12 / l11;
    let l22 = (s22 - l21 * l21).max(0.0).sqrt();
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    [
        comp.mean[0] + l11 * g1,
        comp.mean[1] + l21 * g1 + l22 * g2,
    ]
}

/// `n` draws mapped into the unit square (points beyond the raw bound are
/// clipped to the boundary).
pub fn sample_gmm(spec: &GmmSpec, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let transform = gmm_domain_transform();
    let mut rng = rng_from_seed(seed);
    let mut points = Array2::zeros((n, 2));
    for i in 0..n {
        let raw = sample_gmm_raw(spec, &mut rng);
        let unit = transform.to_unit_clipped(&raw)?;
        points[(i, 0)] = unit[0];
        points[(i, 1)] = unit[1];
    }
    SampleSet::from_points(
        points,
        Provenance {
            generator: "gmm".into(),
            seed,
            index: 0,
        },
    )
}

/// A Dirichlet concentration vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSpec {
    pub alpha: Vec<f64>,
}

impl DirichletSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidArgument(
                "Dirichlet dimension must be >= 2".into(),
            ));
        }
        let (lo, hi) = DIRICHLET_ALPHA_RANGE;
        if alpha.iter().any(|&a| !(lo..=hi).contains(&a)) {
            return Err(Error::InvalidArgument(format!(
                "every concentration parameter must lie in [{lo}, {hi}]"
            )));
        }
        Ok(DirichletSpec { alpha })
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len()
    }
}

/// Concentrations uniform on the configured range.
pub fn draw_dirichlet_spec(rng: &mut Rng, dimension: usize) -> Result<DirichletSpec> {
    if dimension < 2 {
        return Err(Error::InvalidArgument(
            "Dirichlet dimension must be >= 2".into(),
        ));
    }
    let (lo, hi) = DIRICHLET_ALPHA_RANGE;
    DirichletSpec::new((0..dimension).map(|_| uniform(rng, lo, hi)).collect())
}

/// `n` simplex points via normalized Gamma draws, full `d` coordinates each.
pub fn sample_dirichlet_points(spec: &DirichletSpec, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let gammas: Vec<Gamma<f64>> = spec
        .alpha
        .iter()
        .map(|&a| {
            Gamma::new(a, 1.0).map_err(|e| {
                Error::InvalidArgument(format!("invalid Gamma shape {a}: {e}"))
            })
        })
        .collect::<Result<_>>()?;
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut draw: Vec<f64> = gammas.iter().map(|g| g.sample(&mut rng)).collect();
        let total: f64 = draw.iter().sum();
        for v in &mut draw {
            *v /= total;
        }
        out.push(draw);
    }
    Ok(out)
}

/// Sample points projected to their first `d - 1` coordinates (the last one
/// is redundant on the simplex), packaged for the basis machinery.
pub fn sample_dirichlet(spec: &DirichletSpec, n: usize, seed: u64) -> Result<SampleSet> {
    let full = sample_dirichlet_points(spec, n, seed)?;
    let d = spec.dimension();
    let rows: Vec<Vec<f64>> = full.into_iter().map(|mut p| {
        p.truncate(d - 1);
        p
    }).collect();
    SampleSet::from_rows(
        &rows,
        Provenance {
            generator: "dirichlet".into(),
            seed,
            index: 0,
        },
    )
}

/// Per-set sample count rule `n = ceil(c N^(3/5))`.
pub fn points_per_set(num_sets: usize, c: f64) -> usize {
    ((c * (num_sets as f64).powf(0.6)).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::trapezoid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mixture_pdf_integrates_to_one() {
        let mut rng = rng_from_seed(5);
        for _ in 0..5 {
            let m = draw_trunc_gauss_mixture(&mut rng);
            let mass = trapezoid(|x| m.pdf(x), 0.0, 1.0, 100_000);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn ground_truth_is_deterministic() {
        assert_eq!(draw_ground_truth(11), draw_ground_truth(11));
        assert_ne!(draw_ground_truth(11), draw_ground_truth(12));
    }

    #[test]
    fn ground_truth_weight_moments() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..1000u64 {
            let map = draw_ground_truth(seed);
            assert!(map.weight_l1() <= 50.0);
            for &t in &map.weights {
                assert!((-5.0..=5.0).contains(&t));
                sum += t;
                count += 1;
            }
        }
        assert_abs_diff_eq!(sum / count as f64, 0.0, epsilon = 0.1);
    }

    #[test]
    fn f_true_at_anchor_gives_kernel_at_zero() {
        let map = draw_ground_truth(3);
        let single = GroundTruthMap {
            weights: vec![1.0],
            anchors: vec![map.anchors[0].clone()],
            bandwidth: 1.0,
        };
        let v = eval_f_true(&single, &map.anchors[0]).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn f_true_matches_closed_form_kernel_of_quadrature_distance() {
        let map = draw_ground_truth(8);
        let single = GroundTruthMap {
            weights: vec![1.0],
            anchors: vec![map.anchors[1].clone()],
            bandwidth: 1.0,
        };
        let p = &map.anchors[2];
        let d2 = mixture_l2_sq(&single.anchors[0], p, 1e-12).unwrap();
        let v = eval_f_true(&single, p).unwrap();
        assert_abs_diff_eq!(v, (-d2 / 2.0).exp(), epsilon = 1e-8);
    }

    #[test]
    fn f_true_matches_dense_grid_oracle() {
        let map = draw_ground_truth(21);
        let mut rng = rng_from_seed(99);
        let p = draw_trunc_gauss_mixture(&mut rng);
        let mut oracle = 0.0;
        for (theta, g) in map.weights.iter().zip(&map.anchors) {
            let d2 = trapezoid(
                |x| {
                    let d = g.pdf(x) - p.pdf(x);
                    d * d
                },
                0.0,
                1.0,
                1_000_000,
            );
            oracle += theta * (-d2 / 2.0).exp();
        }
        let v = eval_f_true(&map, &p).unwrap();
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-6);
    }

    #[test]
    fn trunc_gauss_sampling_concentrates_and_stays_in_box() {
        let tight = TruncGaussMixture::new(
            TruncGaussComponent::new(0.5, 1e-3).unwrap(),
            TruncGaussComponent::new(0.5, 1e-3).unwrap(),
        );
        let s = sample_trunc_gauss_mixture(&tight, 1000, 7).unwrap();
        let mean: f64 = s.points().column(0).sum() / s.len() as f64;
        assert_abs_diff_eq!(mean, 0.5, epsilon = 0.01);

        let mut rng = rng_from_seed(13);
        let wide = draw_trunc_gauss_mixture(&mut rng);
        let s = sample_trunc_gauss_mixture(&wide, 5000, 8).unwrap();
        assert!(s.points().iter().all(|&x| (0.0..=1.0).contains(&x)));
        let again = sample_trunc_gauss_mixture(&wide, 5000, 8).unwrap();
        assert_eq!(s.points(), again.points());
    }

    #[test]
    fn gmm_spec_ranges_and_positive_definiteness() {
        for seed in 0..200u64 {
            let spec = draw_gmm(seed);
            assert!((1..=10).contains(&spec.k()));
            if spec.k() == 1 {
                assert_eq!(spec.weights(), vec![1.0]);
            }
            let wsum: f64 = spec.weights().iter().sum();
            assert_abs_diff_eq!(wsum, 1.0, epsilon = 1e-12);
            for c in &spec.components {
                assert!(c.mean.iter().all(|m| (-5.0..=5.0).contains(m)));
                let (lo, _) = c.covariance_eigenvalues();
                assert!(lo > 0.0, "covariance must be positive definite");
            }
        }
    }

    #[test]
    fn gmm_sample_covariance_matches_spec() {
        let mut rng = rng_from_seed(17);
        let spec = draw_gmm_components(&mut rng, 1);
        let n = 100_000;
        let mut raw = Vec::with_capacity(n);
        let mut srng = rng_from_seed(4);
        for _ in 0..n {
            raw.push(sample_gmm_raw(&spec, &mut srng));
        }
        let mean = [
            raw.iter().map(|p| p[0]).sum::<f64>() / n as f64,
            raw.iter().map(|p| p[1]).sum::<f64>() / n as f64,
        ];
        let mut cov = [[0.0f64; 2]; 2];
        for p in &raw {
            let d = [p[0] - mean[0], p[1] - mean[1]];
            cov[0][0] += d[0] * d[0];
            cov[0][1] += d[0] * d[1];
            cov[1][1] += d[1] * d[1];
        }
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        let truth = spec.components[0].covariance;
        for (est, tru) in [
            (cov[0][0], truth[0][0]),
            (cov[0][1], truth[0][1]),
            (cov[1][1], truth[1][1]),
        ] {
            assert!(
                (est - tru).abs() <= 0.05 * truth[0][0].max(truth[1][1]),
                "estimated {est} vs specified {tru}"
            );
        }
    }

    #[test]
    fn gmm_points_live_in_unit_square() {
        let spec = draw_gmm(5);
        let s = sample_gmm(&spec, 2000, 6).unwrap();
        assert_eq!(s.dimension(), 2);
        assert!(s.points().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn dirichlet_symmetric_mean() {
        let spec = DirichletSpec::new(vec![1.0, 1.0, 1.0]).unwrap();
        let pts = sample_dirichlet_points(&spec, 100_000, 3).unwrap();
        for coord in 0..3 {
            let mean: f64 = pts.iter().map(|p| p[coord]).sum::<f64>() / pts.len() as f64;
            assert_abs_diff_eq!(mean, 1.0 / 3.0, epsilon = 0.01);
        }
    }

    #[test]
    fn dirichlet_points_sum_to_one_and_stay_positive() {
        let spec = DirichletSpec::new(vec![0.5, 2.0, 7.0]).unwrap();
        let pts = sample_dirichlet_points(&spec, 20_000, 10).unwrap();
        for p in &pts {
            let sum: f64 = p.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(p.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn dirichlet_skewed_mean() {
        let spec = DirichletSpec::new(vec![10.0, 0.1]).unwrap();
        let pts = sample_dirichlet_points(&spec, 100_000, 42).unwrap();
        let mean: f64 = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        assert_abs_diff_eq!(mean, 10.0 / 10.1, epsilon = 0.005);
    }

    #[test]
    fn dirichlet_sample_set_projects_last_coordinate() {
        let spec = DirichletSpec::new(vec![2.0, 3.0, 4.0]).unwrap();
        let s = sample_dirichlet(&spec, 50, 9).unwrap();
        assert_eq!(s.dimension(), 2);
        let full = sample_dirichlet_points(&spec, 50, 9).unwrap();
        for (i, p) in full.iter().enumerate() {
            assert_eq!(s.points()[(i, 0)], p[0]);
            assert_eq!(s.points()[(i, 1)], p[1]);
        }
    }

    #[test]
    fn points_per_set_rule() {
        // 1000^0.6 = 63.0957... rounds up to 64.
        assert_eq!(points_per_set(1000, 1.0), 64);
        assert_eq!(points_per_set(10_000, 1.0), 252);
        assert_eq!(points_per_set(1, 1.0), 1);
        assert_eq!(points_per_set(1000, 0.5), 32);
    }
}
