//! Declarative experiment configuration: a flat `key = value` file with `#`
//! comments, every knob seeded and explicit. The canonical rendering (fixed
//! key order, resolved defaults) is what gets digested into reports, so a
//! report row can always be traced back to an exact configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::dataset::ExperimentKind;
use crate::error::{Error, Result};
use crate::regress::KernelKind;

/// Estimators and baselines a benchmark run can include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Bb,
    Kk,
    Aic,
    Bic,
    Cv,
    Mle,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bb" => Ok(Method::Bb),
            "kk" => Ok(Method::Kk),
            "aic" => Ok(Method::Aic),
            "bic" => Ok(Method::Bic),
            "cv" => Ok(Method::Cv),
            "mle" => Ok(Method::Mle),
            other => Err(Error::Parse(format!(
                "unknown method {other:?} (expected bb, kk, aic, bic, cv, or mle)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Bb => "bb",
            Method::Kk => "kk",
            Method::Aic => "aic",
            Method::Bic => "bic",
            Method::Cv => "cv",
            Method::Mle => "mle",
        }
    }
}

/// Per-set point count: fixed, or the `ceil(c N^(3/5))` rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointsRule {
    Auto,
    Fixed(usize),
}

/// Truncation grid: explicit levels, or rule constants fed through
/// `t = C n^(1/(2 + gamma^-1))`.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncationGrid {
    Explicit(Vec<f64>),
    RuleConstants(Vec<f64>),
}

/// Feature-count grid: explicit counts, or constants for `ceil(c n ln n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureGrid {
    Explicit(Vec<usize>),
    RuleConstants(Vec<f64>),
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub points_per_set: PointsRule,
    pub points_scale_c: f64,
    pub dirichlet_dim: usize,
    pub noise_std: f64,
    pub methods: Vec<Method>,
    pub basis_gamma: Vec<f64>,
    pub basis_nu: Vec<f64>,
    pub basis_radius: f64,
    pub grid_t: TruncationGrid,
    pub grid_d: FeatureGrid,
    pub grid_sigma: Vec<f64>,
    pub grid_lambda: Vec<f64>,
    pub grid_sigma_kk: Vec<f64>,
    pub kk_kernel: KernelKind,
    pub validation_fraction: f64,
    pub warmup_queries: usize,
    pub timed_queries: usize,
    pub repetitions: usize,
    pub truncate_predictions: bool,
    pub em_restarts: usize,
    pub em_max_iters: usize,
    pub em_tol: f64,
    pub cv_holdout_fraction: f64,
    pub mle_max_iters: usize,
    pub mle_tol: f64,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The input-box dimension of this experiment's sample sets.
    pub fn input_dimension(&self) -> usize {
        match self.experiment {
            ExperimentKind::SyntheticMap => 1,
            ExperimentKind::GmmModelSel => 2,
            ExperimentKind::Dirichlet => self.dirichlet_dim - 1,
        }
    }

    /// Resolved per-set point count for a dataset of `num_sets` instances.
    pub fn resolved_points(&self, num_sets: usize) -> usize {
        match self.points_per_set {
            PointsRule::Fixed(n) => n,
            PointsRule::Auto => crate::synth::points_per_set(num_sets, self.points_scale_c),
        }
    }

    /// Canonical rendering: every key in fixed order with resolved values.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let fl = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(s, "experiment = {}", self.experiment.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "train_size = {}", self.train_size);
        let _ = writeln!(s, "test_size = {}", self.test_size);
        match self.points_per_set {
            PointsRule::Auto => {
                let _ = writeln!(s, "points_per_set = auto");
            }
            PointsRule::Fixed(n) => {
                let _ = writeln!(s, "points_per_set = {n}");
            }
        }
        let _ = writeln!(s, "points_scale_c = {}", self.points_scale_c);
        let _ = writeln!(s, "dirichlet_dim = {}", self.dirichlet_dim);
        let _ = writeln!(s, "noise_std = {}", self.noise_std);
        let _ = writeln!(
            s,
            "methods = {}",
            self.methods
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "basis_gamma = {}", fl(&self.basis_gamma));
        let _ = writeln!(s, "basis_nu = {}", fl(&self.basis_nu));
        let _ = writeln!(s, "basis_radius = {}", self.basis_radius);
        match &self.grid_t {
            TruncationGrid::Explicit(v) => {
                let _ = writeln!(s, "grid_t = {}", fl(v));
            }
            TruncationGrid::RuleConstants(_) => {
                let _ = writeln!(s, "grid_t = auto");
            }
        }
        if let TruncationGrid::RuleConstants(c) = &self.grid_t {
            let _ = writeln!(s, "grid_c = {}", fl(c));
        } else {
            let _ = writeln!(s, "grid_c = 1");
        }
        match &self.grid_d {
            FeatureGrid::Explicit(v) => {
                let _ = writeln!(
                    s,
                    "grid_d = {}",
                    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                );
            }
            FeatureGrid::RuleConstants(_) => {
                let _ = writeln!(s, "grid_d = auto");
            }
        }
        if let FeatureGrid::RuleConstants(c) = &self.grid_d {
            let _ = writeln!(s, "grid_d_c = {}", fl(c));
        } else {
            let _ = writeln!(s, "grid_d_c = 1");
        }
        let _ = writeln!(s, "grid_sigma = {}", fl(&self.grid_sigma));
        let _ = writeln!(s, "grid_lambda = {}", fl(&self.grid_lambda));
        let _ = writeln!(s, "grid_sigma_kk = {}", fl(&self.grid_sigma_kk));
        let _ = writeln!(s, "kk_kernel = {}", self.kk_kernel.name());
        let _ = writeln!(s, "validation_fraction = {}", self.validation_fraction);
        let _ = writeln!(s, "warmup_queries = {}", self.warmup_queries);
        let _ = writeln!(s, "timed_queries = {}", self.timed_queries);
        let _ = writeln!(s, "repetitions = {}", self.repetitions);
        let _ = writeln!(s, "truncate_predictions = {}", self.truncate_predictions);
        let _ = writeln!(s, "em_restarts = {}", self.em_restarts);
        let _ = writeln!(s, "em_max_iters = {}", self.em_max_iters);
        let _ = writeln!(s, "em_tol = {}", self.em_tol);
        let _ = writeln!(s, "cv_holdout_fraction = {}", self.cv_holdout_fraction);
        let _ = writeln!(s, "mle_max_iters = {}", self.mle_max_iters);
        let _ = writeln!(s, "mle_tol = {}", self.mle_tol);
        if let Some(dir) = &self.out_dir {
            let _ = writeln!(s, "out_dir = {}", dir.display());
        }
        s
    }

    /// CRC32 of the canonical rendering, hex encoded.
    pub fn digest(&self) -> String {
        format!("{:08x}", crc32fast::hash(self.canonical().as_bytes()))
    }
}

/// Incremental builder shared by the file parser and CLI flag overrides.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    experiment: Option<ExperimentKind>,
    seed: Option<u64>,
    train_size: Option<usize>,
    test_size: Option<usize>,
    points_per_set: Option<PointsRule>,
    points_scale_c: Option<f64>,
    dirichlet_dim: Option<usize>,
    noise_std: Option<f64>,
    methods: Option<Vec<Method>>,
    basis_gamma: Option<Vec<f64>>,
    basis_nu: Option<Vec<f64>>,
    basis_radius: Option<f64>,
    grid_t: Option<Vec<f64>>,
    grid_c: Option<Vec<f64>>,
    grid_t_auto: bool,
    grid_d: Option<Vec<usize>>,
    grid_d_c: Option<Vec<f64>>,
    grid_d_auto: bool,
    grid_sigma: Option<Vec<f64>>,
    grid_lambda: Option<Vec<f64>>,
    grid_sigma_kk: Option<Vec<f64>>,
    kk_kernel: Option<KernelKind>,
    validation_fraction: Option<f64>,
    warmup_queries: Option<usize>,
    timed_queries: Option<usize>,
    repetitions: Option<usize>,
    truncate_predictions: Option<bool>,
    em_restarts: Option<usize>,
    em_max_iters: Option<usize>,
    em_tol: Option<f64>,
    cv_holdout_fraction: Option<f64>,
    mle_max_iters: Option<usize>,
    mle_tol: Option<f64>,
    out_dir: Option<PathBuf>,
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|e| Error::Parse(format!("{key}: expected an unsigned integer, got {v:?} ({e})")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|e| Error::Parse(format!("{key}: expected an unsigned integer, got {v:?} ({e})")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|e| Error::Parse(format!("{key}: expected a number, got {v:?} ({e})")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = v
        .split(',')
        .map(|p| parse_f64(key, p.trim()))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Parse(format!("{key}: list must be nonempty")));
    }
    Ok(items)
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|p| parse_usize(key, p.trim())).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse(format!(
            "{key}: expected true or false, got {other:?}"
        ))),
    }
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => self.experiment = Some(ExperimentKind::parse(v)?),
            "seed" => self.seed = Some(parse_u64(key, v)?),
            "train_size" => self.train_size = Some(parse_usize(key, v)?),
            "test_size" => self.test_size = Some(parse_usize(key, v)?),
            "points_per_set" => {
                self.points_per_set = Some(if v == "auto" {
                    PointsRule::Auto
                } else {
                    PointsRule::Fixed(parse_usize(key, v)?)
                })
            }
            "points_scale_c" => self.points_scale_c = Some(parse_f64(key, v)?),
            "dirichlet_dim" => self.dirichlet_dim = Some(parse_usize(key, v)?),
            "noise_std" => self.noise_std = Some(parse_f64(key, v)?),
            "methods" => {
                let ms: Vec<Method> = v
                    .split(',')
                    .map(|p| Method::parse(p.trim()))
                    .collect::<Result<_>>()?;
                self.methods = Some(ms);
            }
            "basis_gamma" => self.basis_gamma = Some(parse_f64_list(key, v)?),
            "basis_nu" => self.basis_nu = Some(parse_f64_list(key, v)?),
            "basis_radius" => self.basis_radius = Some(parse_f64(key, v)?),
            "grid_t" => {
                if v == "auto" {
                    self.grid_t_auto = true;
                    self.grid_t = None;
                } else {
                    self.grid_t = Some(parse_f64_list(key, v)?);
                    self.grid_t_auto = false;
                }
            }
            "grid_c" => self.grid_c = Some(parse_f64_list(key, v)?),
            "grid_d" => {
                if v == "auto" {
                    self.grid_d_auto = true;
                    self.grid_d = None;
                } else {
                    self.grid_d = Some(parse_usize_list(key, v)?);
                    self.grid_d_auto = false;
                }
            }
            "grid_d_c" => self.grid_d_c = Some(parse_f64_list(key, v)?),
            "grid_sigma" => self.grid_sigma = Some(parse_f64_list(key, v)?),
            "grid_lambda" => self.grid_lambda = Some(parse_f64_list(key, v)?),
            "grid_sigma_kk" => self.grid_sigma_kk = Some(parse_f64_list(key, v)?),
            "kk_kernel" => {
                self.kk_kernel = Some(match v {
                    "rbf" => KernelKind::Rbf,
                    "bounded" => KernelKind::BoundedSupport,
                    other => {
                        return Err(Error::Parse(format!(
                            "kk_kernel: expected rbf or bounded, got {other:?}"
                        )))
                    }
                })
            }
            "validation_fraction" => self.validation_fraction = Some(parse_f64(key, v)?),
            "warmup_queries" => self.warmup_queries = Some(parse_usize(key, v)?),
            "timed_queries" => self.timed_queries = Some(parse_usize(key, v)?),
            "repetitions" => self.repetitions = Some(parse_usize(key, v)?),
            "truncate_predictions" => self.truncate_predictions = Some(parse_bool(key, v)?),
            "em_restarts" => self.em_restarts = Some(parse_usize(key, v)?),
            "em_max_iters" => self.em_max_iters = Some(parse_usize(key, v)?),
            "em_tol" => self.em_tol = Some(parse_f64(key, v)?),
            "cv_holdout_fraction" => self.cv_holdout_fraction = Some(parse_f64(key, v)?),
            "mle_max_iters" => self.mle_max_iters = Some(parse_usize(key, v)?),
            "mle_tol" => self.mle_tol = Some(parse_f64(key, v)?),
            "out_dir" => self.out_dir = Some(PathBuf::from(v)),
            other => {
                return Err(Error::Parse(format!("unknown configuration key {other:?}")));
            }
        }
        Ok(())
    }

    /// Validate and fill defaults.
    pub fn finish(self) -> Result<ExperimentConfig> {
        let experiment = self
            .experiment
            .ok_or_else(|| Error::Parse("missing required key \"experiment\"".into()))?;
        let dirichlet_dim = self.dirichlet_dim.unwrap_or(3);
        if experiment == ExperimentKind::Dirichlet && dirichlet_dim < 2 {
            return Err(Error::Parse("dirichlet_dim must be >= 2".into()));
        }
        let dim = match experiment {
            ExperimentKind::SyntheticMap => 1,
            ExperimentKind::GmmModelSel => 2,
            ExperimentKind::Dirichlet => dirichlet_dim - 1,
        };
        let broadcast = |name: &str, v: Option<Vec<f64>>, default: f64| -> Result<Vec<f64>> {
            let v = v.unwrap_or_else(|| vec![default]);
            if v.len() == 1 {
                return Ok(vec![v[0]; dim]);
            }
            if v.len() != dim {
                return Err(Error::Parse(format!(
                    "{name}: expected 1 or {dim} entries, got {}",
                    v.len()
                )));
            }
            Ok(v)
        };
        let basis_gamma = broadcast("basis_gamma", self.basis_gamma, 1.0)?;
        let basis_nu = broadcast("basis_nu", self.basis_nu, 1.0)?;
        if basis_gamma.iter().chain(&basis_nu).any(|&x| x <= 0.0) {
            return Err(Error::Parse(
                "basis_gamma and basis_nu entries must be positive".into(),
            ));
        }
        let methods = match self.methods {
            Some(m) if !m.is_empty() => m,
            Some(_) => return Err(Error::Parse("methods list must be nonempty".into())),
            None => match experiment {
                ExperimentKind::SyntheticMap => vec![Method::Bb, Method::Kk],
                ExperimentKind::GmmModelSel => vec![
                    Method::Bb,
                    Method::Kk,
                    Method::Aic,
                    Method::Bic,
                    Method::Cv,
                ],
                ExperimentKind::Dirichlet => vec![Method::Bb, Method::Kk, Method::Mle],
            },
        };
        {
            let set: BTreeSet<Method> = methods.iter().copied().collect();
            if set.len() != methods.len() {
                return Err(Error::Parse("methods list contains duplicates".into()));
            }
        }
        for m in &methods {
            let ok = match m {
                Method::Bb | Method::Kk => true,
                Method::Aic | Method::Bic | Method::Cv => {
                    experiment == ExperimentKind::GmmModelSel
                }
                Method::Mle => experiment == ExperimentKind::Dirichlet,
            };
            if !ok {
                return Err(Error::Parse(format!(
                    "method {} is not available for experiment {}",
                    m.name(),
                    experiment.name()
                )));
            }
        }
        let grid_t = if let Some(t) = self.grid_t {
            if t.iter().any(|&x| x < 0.0) {
                return Err(Error::Parse("grid_t entries must be >= 0".into()));
            }
            TruncationGrid::Explicit(t)
        } else {
            let c = self.grid_c.unwrap_or_else(|| vec![1.0]);
            if c.iter().any(|&x| x <= 0.0) {
                return Err(Error::Parse("grid_c entries must be positive".into()));
            }
            TruncationGrid::RuleConstants(c)
        };
        let grid_d = if let Some(d) = self.grid_d {
            if d.is_empty() || d.iter().any(|&x| x == 0) {
                return Err(Error::Parse("grid_d entries must be positive".into()));
            }
            FeatureGrid::Explicit(d)
        } else {
            let c = self.grid_d_c.unwrap_or_else(|| vec![1.0]);
            if c.iter().any(|&x| x <= 0.0) {
                return Err(Error::Parse("grid_d_c entries must be positive".into()));
            }
            FeatureGrid::RuleConstants(c)
        };
        let positive_list = |name: &str, v: Option<Vec<f64>>, default: f64| -> Result<Vec<f64>> {
            let v = v.unwrap_or_else(|| vec![default]);
            if v.iter().any(|&x| x <= 0.0) {
                return Err(Error::Parse(format!("{name} entries must be positive")));
            }
            Ok(v)
        };
        let grid_sigma = positive_list("grid_sigma", self.grid_sigma, 1.0)?;
        let grid_sigma_kk = positive_list("grid_sigma_kk", self.grid_sigma_kk, 0.5)?;
        let grid_lambda = {
            let v = self.grid_lambda.unwrap_or_else(|| vec![1e-6]);
            if v.iter().any(|&x| x < 0.0) {
                return Err(Error::Parse("grid_lambda entries must be >= 0".into()));
            }
            v
        };
        let fraction = |name: &str, v: Option<f64>, default: f64| -> Result<f64> {
            let x = v.unwrap_or(default);
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Parse(format!("{name} must lie in (0, 1), got {x}")));
            }
            Ok(x)
        };
        let cfg = ExperimentConfig {
            experiment,
            seed: self.seed.unwrap_or(crate::DEFAULT_SEED),
            train_size: self.train_size.unwrap_or(1000).max(1),
            test_size: self.test_size.unwrap_or(500).max(1),
            points_per_set: self.points_per_set.unwrap_or(PointsRule::Auto),
            points_scale_c: {
                let c = self.points_scale_c.unwrap_or(1.0);
                if c <= 0.0 {
                    return Err(Error::Parse("points_scale_c must be positive".into()));
                }
                c
            },
            dirichlet_dim,
            noise_std: {
                let n = self.noise_std.unwrap_or(0.0);
                if n < 0.0 {
                    return Err(Error::Parse("noise_std must be >= 0".into()));
                }
                n
            },
            methods,
            basis_gamma,
            basis_nu,
            basis_radius: {
                let r = self.basis_radius.unwrap_or(1.0);
                if r <= 0.0 {
                    return Err(Error::Parse("basis_radius must be positive".into()));
                }
                r
            },
            grid_t,
            grid_d,
            grid_sigma,
            grid_lambda,
            grid_sigma_kk,
            kk_kernel: self.kk_kernel.unwrap_or(KernelKind::Rbf),
            validation_fraction: fraction(
                "validation_fraction",
                self.validation_fraction,
                0.2,
            )?,
            warmup_queries: self.warmup_queries.unwrap_or(10),
            timed_queries: self.timed_queries.unwrap_or(100).max(1),
            repetitions: self.repetitions.unwrap_or(1).max(1),
            truncate_predictions: self.truncate_predictions.unwrap_or(true),
            em_restarts: self.em_restarts.unwrap_or(5).max(1),
            em_max_iters: self.em_max_iters.unwrap_or(100).max(1),
            em_tol: {
                let t = self.em_tol.unwrap_or(1e-6);
                if t <= 0.0 {
                    return Err(Error::Parse("em_tol must be positive".into()));
                }
                t
            },
            cv_holdout_fraction: fraction(
                "cv_holdout_fraction",
                self.cv_holdout_fraction,
                0.2,
            )?,
            mle_max_iters: self.mle_max_iters.unwrap_or(500).max(1),
            mle_tol: {
                let t = self.mle_tol.unwrap_or(1e-9);
                if t <= 0.0 {
                    return Err(Error::Parse("mle_tol must be positive".into()));
                }
                t
            },
            out_dir: self.out_dir,
        };
        if let PointsRule::Fixed(0) = cfg.points_per_set {
            return Err(Error::Parse("points_per_set must be >= 1".into()));
        }
        Ok(cfg)
    }
}

/// Parse a configuration file. Duplicate and unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut builder = ConfigBuilder::new();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "line {}: expected \"key = value\", got {line:?}",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
        builder
            .set(key, value)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
    }
    builder.finish()
}
