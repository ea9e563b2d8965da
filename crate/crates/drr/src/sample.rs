use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a sample set came from; carried through dataset files and reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub index: u64,
}

impl Provenance {
    pub fn manual() -> Self {
        Provenance {
            generator: "manual".to_string(),
            seed: 0,
            index: 0,
        }
    }
}

/// One observed instance: `n` points in the unit box `[0, 1]^l`, already
/// mapped through the experiment's domain transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Array2<f64>,
    provenance: Provenance,
}

impl SampleSet {
    /// Wrap an `n x l` point matrix, rejecting coordinates outside the unit box.
    pub fn from_points(points: Array2<f64>, provenance: Provenance) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::InvalidArgument("sample set is empty".into()));
        }
        if points.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "sample points must have at least one coordinate".into(),
            ));
        }
        for row in points.rows() {
            check_unit_box(row.as_slice().expect("contiguous row"))?;
        }
        Ok(SampleSet { points, provenance })
    }

    pub fn from_rows(rows: &[Vec<f64>], provenance: Provenance) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("sample set is empty".into()));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(
                "sample rows have inconsistent lengths".into(),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), dim), flat)
            .expect("row-major shape matches collected data");
        Self::from_points(points, provenance)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

pub(crate) fn check_unit_box(x: &[f64]) -> Result<()> {
    for (index, &value) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) || value.is_nan() {
            return Err(Error::OutOfDomain { index, value });
        }
    }
    Ok(())
}
