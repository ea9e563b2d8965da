//! Versioned binary model container.
//!
//! Layout: `"DRRM"` magic, `u32` container version, `u32` header length, a
//! JSON header, `u64` payload length, raw little-endian `f64`/`u64` arrays,
//! and a trailing CRC32 over the payload. Random-feature frequencies and
//! phases are not stored; they are regenerated from the recorded seed on load
//! and verified against a stored checksum.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_index_set, BasisConfig, CoefficientVector, DomainTransform};
use crate::error::{Error, Result};
use crate::regress::{
    kk_predict, predict, predict_raw, DoubleBasisModel, KernelKernelModel, KernelKind,
    TrainingMetadata,
};
use crate::rks::draw_feature_map;
use crate::sample::SampleSet;

pub const MODEL_MAGIC: &[u8; 4] = b"DRRM";
pub const MODEL_VERSION: u32 = 1;

/// Upper bound on regenerated feature-map size (`D * S` entries) accepted at
/// load time; keeps hostile headers from forcing huge allocations.
pub const MAX_MAP_ELEMENTS: u64 = 1 << 24;

/// A trained estimator of either kind; vector-valued targets hold one model
/// per response coordinate (they share the representation).
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    DoubleBasis(Vec<DoubleBasisModel>),
    KernelKernel(Vec<KernelKernelModel>),
}

impl TrainedModel {
    pub fn method_name(&self) -> &'static str {
        match self {
            TrainedModel::DoubleBasis(_) => "bb",
            TrainedModel::KernelKernel(_) => "kk",
        }
    }

    pub fn response_dim(&self) -> usize {
        match self {
            TrainedModel::DoubleBasis(m) => m.len(),
            TrainedModel::KernelKernel(m) => m.len(),
        }
    }

    /// Input dimension the model expects.
    pub fn input_dimension(&self) -> usize {
        match self {
            TrainedModel::DoubleBasis(m) => m[0].basis().dimension(),
            TrainedModel::KernelKernel(m) => m[0].basis().dimension(),
        }
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        match self {
            TrainedModel::DoubleBasis(m) => m[0].metadata(),
            TrainedModel::KernelKernel(m) => m[0].metadata(),
        }
    }

    /// One prediction per response coordinate (double-basis outputs are
    /// truncated unless `raw` is set).
    pub fn predict_all(&self, samples: &SampleSet, raw: bool) -> Result<Vec<f64>> {
        if samples.dimension() != self.input_dimension() {
            return Err(Error::InvalidArgument(format!(
                "input dimension {} does not match expected dimension {}",
                samples.dimension(),
                self.input_dimension()
            )));
        }
        match self {
            TrainedModel::DoubleBasis(models) => models
                .iter()
                .map(|m| if raw { predict_raw(m, samples) } else { predict(m, samples) })
                .collect(),
            TrainedModel::KernelKernel(models) => {
                models.iter().map(|m| kk_predict(m, samples)).collect()
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BasisWire {
    dimension: usize,
    smoothness: Vec<f64>,
    scale: Vec<f64>,
    radius: f64,
}

impl BasisWire {
    fn from_config(c: &BasisConfig) -> Self {
        BasisWire {
            dimension: c.dimension(),
            smoothness: c.smoothness().to_vec(),
            scale: c.scale().to_vec(),
            radius: c.radius(),
        }
    }

    fn into_config(self) -> Result<BasisConfig> {
        BasisConfig::new(self.dimension, self.smoothness, self.scale, self.radius)
            .map_err(|e| Error::Parse(format!("model header: invalid basis config: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct BbHeader {
    input_dim: usize,
    feature_count: usize,
    bandwidth: f64,
    map_seed: u64,
    map_checksum: u32,
    lambda: f64,
    response_bounds: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct KkHeader {
    bandwidth: f64,
    kernel: KernelKind,
    num_train: usize,
    coeff_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    method: String,
    response_dim: usize,
    basis: BasisWire,
    truncation: f64,
    transform_bounds: Vec<(f64, f64)>,
    metadata: TrainingMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    bb: Option<BbHeader>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kk: Option<KkHeader>,
}

fn push_f64s(payload: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        payload.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serialize a trained model to container bytes.
pub fn model_to_bytes(model: &TrainedModel) -> Result<Vec<u8>> {
    let (header, payload) = match model {
        TrainedModel::DoubleBasis(models) => {
            if models.is_empty() {
                return Err(Error::InvalidArgument("no models to serialize".into()));
            }
            let first = &models[0];
            if models.iter().any(|m| {
                m.feature_map() != first.feature_map()
                    || m.lambda() != first.lambda()
                    || m.index_set() != first.index_set()
            }) {
                return Err(Error::InvalidArgument(
                    "bundled double-basis models must share one representation".into(),
                ));
            }
            let header = ModelHeader {
                method: "bb".into(),
                response_dim: models.len(),
                basis: BasisWire::from_config(first.basis()),
                truncation: first.index_set().truncation(),
                transform_bounds: first.transform().bounds().to_vec(),
                metadata: first.metadata().clone(),
                bb: Some(BbHeader {
                    input_dim: first.feature_map().input_dim(),
                    feature_count: first.feature_map().feature_count(),
                    bandwidth: first.feature_map().bandwidth(),
                    map_seed: first.feature_map().seed(),
                    map_checksum: first.feature_map().checksum(),
                    lambda: first.lambda(),
                    response_bounds: models.iter().map(|m| m.response_bound()).collect(),
                }),
                kk: None,
            };
            let mut payload = Vec::new();
            for m in models {
                push_f64s(&mut payload, m.weights().iter().copied());
            }
            (header, payload)
        }
        TrainedModel::KernelKernel(models) => {
            if models.is_empty() {
                return Err(Error::InvalidArgument("no models to serialize".into()));
            }
            let first = &models[0];
            if models.iter().any(|m| {
                m.coefficients() != first.coefficients()
                    || m.bandwidth() != first.bandwidth()
                    || m.kind() != first.kind()
            }) {
                return Err(Error::InvalidArgument(
                    "bundled kernel-kernel models must share one training representation".into(),
                ));
            }
            let header = ModelHeader {
                method: "kk".into(),
                response_dim: models.len(),
                basis: BasisWire::from_config(first.basis()),
                truncation: first.index_set().truncation(),
                transform_bounds: first.transform().bounds().to_vec(),
                metadata: first.metadata().clone(),
                bb: None,
                kk: Some(KkHeader {
                    bandwidth: first.bandwidth(),
                    kernel: first.kind(),
                    num_train: first.len(),
                    coeff_dim: first.index_set().len(),
                }),
            };
            let mut payload = Vec::new();
            for c in first.coefficients() {
                push_f64s(&mut payload, c.values().iter().copied());
            }
            for m in models {
                push_f64s(&mut payload, m.responses().iter().copied());
            }
            for c in first.coefficients() {
                payload.extend_from_slice(&(c.sample_count() as u64).to_le_bytes());
            }
            (header, payload)
        }
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| Error::Parse(format!("model header serialization failed: {e}")))?;
    let mut out = Vec::with_capacity(16 + header_bytes.len() + payload.len());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Parse(format!("model file truncated while reading {what}")))?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(count * 8, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn u64s(&mut self, count: usize, what: &str) -> Result<Vec<u64>> {
        let bytes = self.take(count * 8, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Parse and validate container bytes, regenerating the feature map.
pub fn model_from_bytes(bytes: &[u8]) -> Result<TrainedModel> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MODEL_MAGIC {
        return Err(Error::Parse("not a model file (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != MODEL_VERSION {
        return Err(Error::Parse(format!(
            "unsupported model container version {version} (expected {MODEL_VERSION})"
        )));
    }
    let header_len = r.u32("header length")? as usize;
    let header_bytes = r.take(header_len, "header")?;
    let header: ModelHeader = serde_json::from_slice(header_bytes)
        .map_err(|e| Error::Parse(format!("model header: {e}")))?;
    let payload_len = r.u64("payload length")? as usize;
    let payload = r.take(payload_len, "payload")?;
    let stored_crc = {
        let mut t = Reader {
            buf: bytes,
            pos: r.pos,
        };
        t.u32("payload checksum")?
    };
    if crc32fast::hash(payload) != stored_crc {
        return Err(Error::Parse("payload checksum mismatch".into()));
    }

    if header.response_dim == 0 {
        return Err(Error::Parse("model header: response_dim must be >= 1".into()));
    }
    let basis = header.basis.into_config()?;
    let transform = DomainTransform::new(header.transform_bounds)
        .map_err(|e| Error::Parse(format!("model header: invalid transform: {e}")))?;
    if transform.dimension() != basis.dimension() {
        return Err(Error::Parse(
            "model header: transform dimension does not match basis dimension".into(),
        ));
    }
    let index_set = enumerate_index_set(&basis, header.truncation)
        .map_err(|e| Error::Parse(format!("model header: invalid truncation: {e}")))?;

    let mut pr = Reader {
        buf: payload,
        pos: 0,
    };
    match header.method.as_str() {
        "bb" => {
            let bb = header
                .bb
                .ok_or_else(|| Error::Parse("model header: missing bb section".into()))?;
            let d = bb.feature_count;
            let s = index_set.len();
            if bb.input_dim != s {
                return Err(Error::Parse(format!(
                    "model header: stored input dimension {} does not match index set size {s}",
                    bb.input_dim
                )));
            }
            if (d as u64).saturating_mul(s as u64) > MAX_MAP_ELEMENTS {
                return Err(Error::Parse(format!(
                    "model header: feature map of {d} x {s} exceeds the load limit"
                )));
            }
            let expected = (header.response_dim as u128) * (d as u128) * 8;
            if expected != payload_len as u128 {
                return Err(Error::Parse(format!(
                    "payload length {payload_len} does not match {} weight vectors of length {d}",
                    header.response_dim
                )));
            }
            if bb.response_bounds.len() != header.response_dim {
                return Err(Error::Parse(
                    "model header: response_bounds length mismatch".into(),
                ));
            }
            let map = draw_feature_map(s, d, bb.bandwidth, bb.map_seed)
                .map_err(|e| Error::Parse(format!("model header: invalid feature map: {e}")))?;
            if map.checksum() != bb.map_checksum {
                return Err(Error::Parse(
                    "regenerated feature map does not match the stored checksum".into(),
                ));
            }
            let mut models = Vec::with_capacity(header.response_dim);
            for out in 0..header.response_dim {
                let weights = pr.f64s(d, "weights")?;
                let model = DoubleBasisModel::from_parts(
                    basis.clone(),
                    index_set.clone(),
                    map.clone(),
                    weights,
                    bb.lambda,
                    bb.response_bounds[out],
                    transform.clone(),
                    header.metadata.clone(),
                )
                .map_err(|e| Error::Parse(format!("model reconstruction failed: {e}")))?;
                models.push(model);
            }
            Ok(TrainedModel::DoubleBasis(models))
        }
        "kk" => {
            let kk = header
                .kk
                .ok_or_else(|| Error::Parse("model header: missing kk section".into()))?;
            let n = kk.num_train;
            let s = index_set.len();
            if kk.coeff_dim != s {
                return Err(Error::Parse(format!(
                    "model header: stored coefficient dimension {} does not match index set size {s}",
                    kk.coeff_dim
                )));
            }
            let expected = (n as u128) * (s as u128) * 8
                + (header.response_dim as u128) * (n as u128) * 8
                + (n as u128) * 8;
            if expected != payload_len as u128 {
                return Err(Error::Parse(format!(
                    "payload length {payload_len} does not match {n} training records"
                )));
            }
            let mut coeff_values = Vec::with_capacity(n);
            for _ in 0..n {
                coeff_values.push(pr.f64s(s, "coefficients")?);
            }
            let mut responses = Vec::with_capacity(header.response_dim);
            for _ in 0..header.response_dim {
                responses.push(pr.f64s(n, "responses")?);
            }
            let counts = pr.u64s(n, "sample counts")?;
            let coefficients: Vec<CoefficientVector> = coeff_values
                .into_iter()
                .zip(&counts)
                .map(|(v, &c)| CoefficientVector::from_parts(v, c as usize))
                .collect();
            let mut models = Vec::with_capacity(header.response_dim);
            for out in 0..header.response_dim {
                let model = KernelKernelModel::from_parts(
                    basis.clone(),
                    index_set.clone(),
                    coefficients.clone(),
                    responses[out].clone(),
                    kk.bandwidth,
                    kk.kernel,
                    transform.clone(),
                    header.metadata.clone(),
                )
                .map_err(|e| Error::Parse(format!("model reconstruction failed: {e}")))?;
                models.push(model);
            }
            Ok(TrainedModel::KernelKernel(models))
        }
        other => Err(Error::Parse(format!("unknown model method {other:?}"))),
    }
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    let bytes = model_to_bytes(model)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes)
}
