use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{ModalityMatrix, MultimodalDataset};
use crate::util;
use crate::{Error, Result};

// Guards floor() against products such as 0.29 * 100 = 28.999999999999996.
const FLOOR_SLACK: f64 = 1e-9;

/// Size of the aligned (unshuffled, complete) leading block.
pub fn aligned_count(n: usize, align_rate: f64) -> usize {
    ((align_rate * n as f64 + FLOOR_SLACK).floor() as usize).min(n)
}

/// Rows dropped per view from a misaligned block of `misaligned` rows.
pub fn missing_count(misaligned: usize, missing_rate: f64) -> usize {
    ((missing_rate * misaligned as f64 + FLOOR_SLACK).floor() as usize).min(misaligned)
}

/// Per-view shuffle `U` and keep mask `C`. The shuffle is the identity on the
/// aligned block; removals only happen inside the misaligned block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionPlan {
    pub align_rate: f64,
    pub missing_rates: Vec<f64>,
    pub seed: u64,
    pub n: usize,
    pub shuffles: Vec<Vec<usize>>,
    pub keep_masks: Vec<Vec<bool>>,
}

impl CorruptionPlan {
    pub fn aligned_count(&self) -> usize {
        aligned_count(self.n, self.align_rate)
    }

    /// Rows each view keeps after corruption.
    pub fn retained(&self) -> Vec<usize> {
        self.keep_masks
            .iter()
            .map(|m| m.iter().filter(|&&k| k).count())
            .collect()
    }
}

/// Same missing rate for every view.
pub fn make_corruption_plan(
    dataset: &MultimodalDataset,
    align_rate: f64,
    missing_rate: f64,
    seed: u64,
) -> Result<CorruptionPlan> {
    let rates = vec![missing_rate; dataset.views().len()];
    make_corruption_plan_per_view(dataset, align_rate, &rates, seed)
}

/// One missing rate per view, which lets the views end up with different
/// row counts.
pub fn make_corruption_plan_per_view(
    dataset: &MultimodalDataset,
    align_rate: f64,
    missing_rates: &[f64],
    seed: u64,
) -> Result<CorruptionPlan> {
    if !(align_rate > 0.0 && align_rate <= 1.0) {
        return Err(Error::invalid(format!("align_rate must be in (0, 1], got {align_rate}")));
    }
    if missing_rates.len() != dataset.views().len() {
        return Err(Error::invalid(format!(
            "{} missing rates for {} views",
            missing_rates.len(),
            dataset.views().len()
        )));
    }
    if let Some(r) = missing_rates.iter().find(|r| !(**r >= 0.0 && **r < 1.0)) {
        return Err(Error::invalid(format!("missing_rate must be in [0, 1), got {r}")));
    }

    let n = dataset.n();
    let aligned = aligned_count(n, align_rate);
    let misaligned = n - aligned;
    let mut rng = util::rng(seed);
    let mut shuffles = Vec::with_capacity(missing_rates.len());
    let mut keep_masks = Vec::with_capacity(missing_rates.len());
    for &rate in missing_rates {
        let mut shuffle: Vec<usize> = (0..n).collect();
        shuffle[aligned..].shuffle(&mut rng);
        let mut mask = vec![true; n];
        let drop = missing_count(misaligned, rate);
        for pos in index::sample(&mut rng, misaligned, drop) {
            mask[aligned + pos] = false;
        }
        shuffles.push(shuffle);
        keep_masks.push(mask);
    }
    Ok(CorruptionPlan {
        align_rate,
        missing_rates: missing_rates.to_vec(),
        seed,
        n,
        shuffles,
        keep_masks,
    })
}

/// Views after shuffling and dropping rows. `origins[v][r]` is the original
/// sample index of row `r` of view `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptedDataset {
    pub views: Vec<ModalityMatrix>,
    pub aligned_count: usize,
    pub virtual_labels: Vec<Vec<usize>>,
    pub origins: Vec<Vec<usize>>,
    pub k: usize,
}

impl CorruptedDataset {
    pub fn row_counts(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.n_rows()).collect()
    }

    /// The leading aligned block of view `v`.
    pub fn aligned_block(&self, v: usize) -> ModalityMatrix {
        let rows: Vec<usize> = (0..self.aligned_count).collect();
        self.views[v].select_rows(&rows)
    }
}

/// Reorders every view by its shuffle, then drops rows whose mask is false.
pub fn apply_corruption(dataset: &MultimodalDataset, plan: &CorruptionPlan) -> Result<CorruptedDataset> {
    if plan.n != dataset.n() || plan.shuffles.len() != dataset.views().len() {
        return Err(Error::shape(format!(
            "plan built for {} samples x {} views, dataset has {} x {}",
            plan.n,
            plan.shuffles.len(),
            dataset.n(),
            dataset.views().len()
        )));
    }
    let mut views = Vec::new();
    let mut virtual_labels = Vec::new();
    let mut origins = Vec::new();
    for ((view, shuffle), mask) in dataset
        .views()
        .iter()
        .zip(&plan.shuffles)
        .zip(&plan.keep_masks)
    {
        if shuffle.len() != plan.n || mask.len() != plan.n {
            return Err(Error::shape("shuffle or mask length differs from n"));
        }
        let kept: Vec<usize> = shuffle
            .iter()
            .zip(mask)
            .filter(|(_, &keep)| keep)
            .map(|(&src, _)| src)
            .collect();
        if kept.is_empty() {
            return Err(Error::degenerate("corruption removed every row of a view"));
        }
        virtual_labels.push(kept.iter().map(|&i| dataset.labels()[i]).collect());
        views.push(view.select_rows(&kept));
        origins.push(kept);
    }
    Ok(CorruptedDataset {
        views,
        aligned_count: plan.aligned_count(),
        virtual_labels,
        origins,
        k: dataset.k(),
    })
}
