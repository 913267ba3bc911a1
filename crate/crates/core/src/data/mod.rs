//! Multi-view datasets, file ingestion, synthetic generation, and the
//! shuffle-then-drop corruption that simulates incomplete misaligned views.

mod corrupt;
mod io;
mod synthetic;

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::{Error, Result};

pub use corrupt::{
    aligned_count, apply_corruption, make_corruption_plan, make_corruption_plan_per_view,
    missing_count, CorruptedDataset, CorruptionPlan,
};
pub use io::{load_dataset, write_dataset};
pub use synthetic::{generate_synthetic, SyntheticSpec};

/// One view: rows are samples, columns are features. Always non-empty and
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityMatrix(Array2<f64>);

impl ModalityMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::shape(format!(
                "view must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry ({r}, {c}) = {v}")));
        }
        Ok(ModalityMatrix(values))
    }

    pub fn n_rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> ModalityMatrix {
        ModalityMatrix(self.0.select(ndarray::Axis(0), rows))
    }
}

impl AsRef<Array2<f64>> for ModalityMatrix {
    fn as_ref(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Aligned, complete views of `n` samples with ground-truth classes.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodalDataset {
    views: Vec<ModalityMatrix>,
    labels: Vec<usize>,
    k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub k: usize,
    pub dims: Vec<usize>,
}

impl MultimodalDataset {
    /// Checks that every view has one row per label and that the labels
    /// cover exactly `0..k` with no empty class.
    pub fn new(views: Vec<ModalityMatrix>, labels: Vec<usize>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::invalid("dataset needs at least one view"));
        }
        let n = labels.len();
        for (i, v) in views.iter().enumerate() {
            if v.n_rows() != n {
                return Err(Error::shape(format!(
                    "label count mismatch: view {i} has {} rows, {} labels",
                    v.n_rows(),
                    n
                )));
            }
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!(
                "labels must cover 0..{k}; class {missing} is empty"
            )));
        }
        Ok(MultimodalDataset { views, labels, k })
    }

    pub fn views(&self) -> &[ModalityMatrix] {
        &self.views
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            n: self.n(),
            k: self.k,
            dims: self.views.iter().map(|v| v.n_cols()).collect(),
        }
    }
}
