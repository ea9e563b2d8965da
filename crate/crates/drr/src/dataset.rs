//! Dataset files: one JSON metadata record on the first line, then one JSON
//! record per instance with a fixed field order (`points`, then `response`).
//! Writing is deterministic, so identical configurations produce
//! byte-identical files.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::sample::{Provenance, SampleSet};
use crate::synth::{
    draw_dirichlet_spec, draw_gmm, draw_ground_truth, draw_trunc_gauss_mixture, eval_f_true,
    sample_dirichlet, sample_gmm, sample_trunc_gauss_mixture, GroundTruthMap,
};

pub const DATASET_FORMAT: &str = "drr-dataset";
pub const DATASET_VERSION: u32 = 1;

/// The three synthetic experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "synthetic-map")]
    SyntheticMap,
    #[serde(rename = "gmm-modelsel")]
    GmmModelSel,
    #[serde(rename = "dirichlet")]
    Dirichlet,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "synthetic-map" => Ok(ExperimentKind::SyntheticMap),
            "gmm-modelsel" => Ok(ExperimentKind::GmmModelSel),
            "dirichlet" => Ok(ExperimentKind::Dirichlet),
            other => Err(Error::Parse(format!(
                "unknown experiment kind {other:?} (expected synthetic-map, gmm-modelsel, or dirichlet)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SyntheticMap => "synthetic-map",
            ExperimentKind::GmmModelSel => "gmm-modelsel",
            ExperimentKind::Dirichlet => "dirichlet",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// First line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format: String,
    pub version: u32,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub num_sets: usize,
    pub points_per_set: usize,
    pub dimension: usize,
    pub response_dim: usize,
    pub params: Vec<(String, String)>,
}

/// One training or test instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub samples: SampleSet,
    pub response: Vec<f64>,
}

/// An in-memory dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub instances: Vec<Instance>,
}

impl Dataset {
    /// Instances paired with scalar responses (requires `response_dim == 1`).
    pub fn scalar_pairs(&self) -> Result<Vec<(SampleSet, f64)>> {
        if self.meta.response_dim != 1 {
            return Err(Error::InvalidArgument(format!(
                "expected scalar responses, dataset has response_dim {}",
                self.meta.response_dim
            )));
        }
        Ok(self
            .instances
            .iter()
            .map(|i| (i.samples.clone(), i.response[0]))
            .collect())
    }

    pub fn vector_pairs(&self) -> Vec<(SampleSet, Vec<f64>)> {
        self.instances
            .iter()
            .map(|i| (i.samples.clone(), i.response.clone()))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceWire {
    points: Vec<Vec<f64>>,
    response: Vec<f64>,
}

/// Serialize the dataset to its line-delimited form.
pub fn dataset_to_string(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    out.push_str(
        &serde_json::to_string(&dataset.meta)
            .map_err(|e| Error::Parse(format!("metadata serialization failed: {e}")))?,
    );
    out.push('\n');
    for inst in &dataset.instances {
        let wire = InstanceWire {
            points: inst
                .samples
                .points()
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            response: inst.response.clone(),
        };
        out.push_str(
            &serde_json::to_string(&wire)
                .map_err(|e| Error::Parse(format!("instance serialization failed: {e}")))?,
        );
        out.push('\n');
    }
    Ok(out)
}

/// Parse a dataset from bytes; errors name the offending record.
pub fn parse_dataset(bytes: &[u8]) -> Result<Dataset> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Parse(format!("dataset is not valid UTF-8: {e}")))?;
    let mut lines = text.lines().enumerate();
    let (_, meta_line) = lines
        .next()
        .ok_or_else(|| Error::Parse("dataset file is empty".into()))?;
    let meta: DatasetMeta = serde_json::from_str(meta_line)
        .map_err(|e| Error::Parse(format!("record 0 (metadata): {e}")))?;
    if meta.format != DATASET_FORMAT {
        return Err(Error::Parse(format!(
            "record 0 (metadata): format {:?} is not {DATASET_FORMAT:?}",
            meta.format
        )));
    }
    if meta.version != DATASET_VERSION {
        return Err(Error::Parse(format!(
            "record 0 (metadata): unsupported version {} (expected {DATASET_VERSION})",
            meta.version
        )));
    }
    if meta.dimension == 0 || meta.response_dim == 0 {
        return Err(Error::Parse(
            "record 0 (metadata): dimension and response_dim must be positive".into(),
        ));
    }
    let mut instances = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let record = instances.len() + 1;
        let wire: InstanceWire = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("record {record} (line {}): {e}", lineno + 1)))?;
        if wire.points.iter().any(|p| p.len() != meta.dimension) {
            return Err(Error::Parse(format!(
                "record {record}: point dimension differs from metadata dimension {}",
                meta.dimension
            )));
        }
        if wire.response.len() != meta.response_dim {
            return Err(Error::Parse(format!(
                "record {record}: response length {} differs from metadata response_dim {}",
                wire.response.len(),
                meta.response_dim
            )));
        }
        if wire.response.iter().any(|y| !y.is_finite()) {
            return Err(Error::Parse(format!(
                "record {record}: non-finite response value"
            )));
        }
        let samples = SampleSet::from_rows(
            &wire.points,
            Provenance {
                generator: meta.kind.name().to_string(),
                seed: meta.seed,
                index: record as u64 - 1,
            },
        )
        .map_err(|e| Error::Parse(format!("record {record}: {e}")))?;
        instances.push(Instance {
            samples,
            response: wire.response,
        });
    }
    if instances.len() != meta.num_sets {
        return Err(Error::Parse(format!(
            "dataset holds {} instances but metadata promises {}",
            instances.len(),
            meta.num_sets
        )));
    }
    Ok(Dataset { meta, instances })
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let text = dataset_to_string(dataset)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&bytes)
}

/// Which half of an experiment a dataset belongs to; train and test draw from
/// disjoint seed streams of the same master seed (and share the ground-truth
/// mapping where one exists).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn stream(self) -> u64 {
        match self {
            Split::Train => stream::TRAIN_INSTANCE,
            Split::Test => stream::TEST_INSTANCE,
        }
    }
}

/// Generation controls shared by the three experiment families.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub num_sets: usize,
    pub points_per_set: usize,
    /// Dirichlet dimension (ignored by the other families).
    pub dirichlet_dim: usize,
    /// Optional additive response noise (zero by default).
    pub noise_std: f64,
}

const SUBSTREAM_DIST: u64 = 101;
const SUBSTREAM_POINTS: u64 = 102;
const SUBSTREAM_NOISE: u64 = 103;

/// Generate one dataset. A `Split::Test` dataset is distributed identically
/// to the train split but from an independent stream.
pub fn build_dataset(spec: &SynthSpec, split: Split) -> Result<Dataset> {
    if spec.num_sets == 0 {
        return Err(Error::InvalidArgument("num_sets must be >= 1".into()));
    }
    if spec.points_per_set == 0 {
        return Err(Error::InvalidArgument("points_per_set must be >= 1".into()));
    }
    if !(spec.noise_std >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise_std must be >= 0, got {}",
            spec.noise_std
        )));
    }
    let ground_truth = match spec.kind {
        ExperimentKind::SyntheticMap => Some(draw_ground_truth(spec.seed)),
        _ => None,
    };
    let mut params: Vec<(String, String)> = Vec::new();
    match spec.kind {
        ExperimentKind::SyntheticMap => {
            params.push(("theta_range".into(), "[-5,5]".into()));
            params.push(("mean_range".into(), "[0,1]".into()));
            params.push(("variance_range".into(), "[0.05,0.1]".into()));
            params.push(("map_components".into(), "10".into()));
            params.push(("kernel_bandwidth".into(), "1".into()));
        }
        ExperimentKind::GmmModelSel => {
            params.push(("k_range".into(), "[1,10]".into()));
            params.push(("mean_range".into(), "[-5,5]^2".into()));
            params.push(("cov_recipe".into(), "a^2AA'+B, a~U[1,2], A~U[-1,1], B~U[0,1]".into()));
            params.push(("raw_box".into(), "[-15,15]^2".into()));
        }
        ExperimentKind::Dirichlet => {
            params.push(("alpha_range".into(), "[0.1,10]".into()));
            params.push(("dirichlet_dim".into(), spec.dirichlet_dim.to_string()));
        }
    }
    if spec.noise_std > 0.0 {
        params.push(("noise_std".into(), format!("{}", spec.noise_std)));
    }
    let (dimension, response_dim) = match spec.kind {
        ExperimentKind::SyntheticMap => (1, 1),
        ExperimentKind::GmmModelSel => (2, 1),
        ExperimentKind::Dirichlet => {
            if spec.dirichlet_dim < 2 {
                return Err(Error::InvalidArgument(
                    "dirichlet_dim must be >= 2".into(),
                ));
            }
            (spec.dirichlet_dim - 1, spec.dirichlet_dim)
        }
    };
    let mut instances = Vec::with_capacity(spec.num_sets);
    for index in 0..spec.num_sets {
        let inst_seed = derive_seed(spec.seed, split.stream(), index as u64);
        instances.push(build_instance(
            spec,
            ground_truth.as_ref(),
            inst_seed,
            index as u64,
        )?);
    }
    Ok(Dataset {
        meta: DatasetMeta {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            kind: spec.kind,
            seed: spec.seed,
            num_sets: spec.num_sets,
            points_per_set: spec.points_per_set,
            dimension,
            response_dim,
            params,
        },
        instances,
    })
}

fn build_instance(
    spec: &SynthSpec,
    ground_truth: Option<&GroundTruthMap>,
    inst_seed: u64,
    index: u64,
) -> Result<Instance> {
    let dist_seed = derive_seed(inst_seed, SUBSTREAM_DIST, 0);
    let points_seed = derive_seed(inst_seed, SUBSTREAM_POINTS, 0);
    let (mut samples, mut response) = match spec.kind {
        ExperimentKind::SyntheticMap => {
            let p = draw_trunc_gauss_mixture(&mut rng_from_seed(dist_seed));
            let samples = sample_trunc_gauss_mixture(&p, spec.points_per_set, points_seed)?;
            let y = eval_f_true(ground_truth.expect("map drawn for this family"), &p)?;
            (samples, vec![y])
        }
        ExperimentKind::GmmModelSel => {
            let gmm = draw_gmm(dist_seed);
            let samples = sample_gmm(&gmm, spec.points_per_set, points_seed)?;
            (samples, vec![gmm.k() as f64])
        }
        ExperimentKind::Dirichlet => {
            let d = draw_dirichlet_spec(&mut rng_from_seed(dist_seed), spec.dirichlet_dim)?;
            let samples = sample_dirichlet(&d, spec.points_per_set, points_seed)?;
            (samples, d.alpha)
        }
    };
    if spec.noise_std > 0.0 {
        let mut rng = rng_from_seed(derive_seed(inst_seed, SUBSTREAM_NOISE, 0));
        for y in &mut response {
            let g: f64 = rng.sample(StandardNormal);
            *y += spec.noise_std * g;
        }
    }
    // Re-tag provenance with the dataset-level index.
    samples = SampleSet::from_points(
        samples.points().clone(),
        Provenance {
            generator: spec.kind.name().to_string(),
            seed: spec.seed,
            index,
        },
    )?;
    Ok(Instance { samples, response })
}
