//! Self-repellent greedy anchor search and anchor re-representation.

mod greedy;
mod walk;

use serde::Serialize;

use crate::data::{CorruptedDataset, ModalityMatrix};
use crate::util::{quantile, sampled_pair_distances};
use crate::{Error, Result};

pub use greedy::{greedy_expand, greedy_sweeps};
pub use walk::{
    decay_factor, self_repellent_visit_scores, transition_matrix, view_visit_scores, walk_schedule,
    TransitionMatrix, VisitScores, WalkBackend, WalkConfig,
};

const RADIUS_SAMPLE_PAIRS: usize = 2000;
const RADIUS_QUANTILE: f64 = 0.25;

/// `max(2k, ceil(sqrt(aligned)))`, capped at `aligned`.
pub fn default_anchor_count(k: usize, aligned: usize) -> usize {
    let root = (aligned as f64).sqrt().ceil() as usize;
    (2 * k).max(root).min(aligned)
}

/// First quartile of (up to 2000 sampled) pairwise Euclidean distances.
pub fn default_radius(x: &ModalityMatrix, seed: u64) -> f64 {
    let mut d = sampled_pair_distances(x.values(), RADIUS_SAMPLE_PAIRS, seed);
    let q = quantile(&mut d, RADIUS_QUANTILE).unwrap_or(1.0);
    if q > 0.0 {
        q
    } else {
        d.into_iter().find(|v| *v > 0.0).unwrap_or(1.0)
    }
}

/// Sorted union of per-view index lists. Every index must be `< bound`.
pub fn unify_indices(lists: &[Vec<usize>], bound: usize) -> Result<Vec<usize>> {
    let mut all: Vec<usize> = lists.iter().flatten().copied().collect();
    if let Some(bad) = all.iter().find(|&&i| i >= bound) {
        return Err(Error::invalid(format!("anchor index {bad} out of range 0..{bound}")));
    }
    all.sort_unstable();
    all.dedup();
    Ok(all)
}

/// `X A^T`: each row re-expressed as dot products with the anchors.
pub fn rerepresent(x: &ModalityMatrix, anchors: &ModalityMatrix) -> Result<ModalityMatrix> {
    if x.n_cols() != anchors.n_cols() {
        return Err(Error::shape(format!(
            "data has {} features, anchors have {}",
            x.n_cols(),
            anchors.n_cols()
        )));
    }
    ModalityMatrix::new(x.values().dot(&anchors.values().t()))
}

#[derive(Debug, Clone)]
pub struct AnchorSet {
    pub per_view_indices: Vec<Vec<usize>>,
    /// Union of the per-view picks, positions in the aligned block.
    pub unified: Vec<usize>,
    /// Per view, the aligned rows at `unified`.
    pub anchors: Vec<ModalityMatrix>,
    pub radii: Vec<f64>,
    pub scores: Vec<VisitScores>,
    pub backends: Vec<WalkBackend>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnchorSummary {
    pub per_view_counts: Vec<usize>,
    pub unified_count: usize,
    pub radii: Vec<f64>,
    pub backends: Vec<WalkBackend>,
}

impl AnchorSet {
    pub fn summary(&self) -> AnchorSummary {
        AnchorSummary {
            per_view_counts: self.per_view_indices.iter().map(Vec::len).collect(),
            unified_count: self.unified.len(),
            radii: self.radii.clone(),
            backends: self.backends.clone(),
        }
    }
}

/// Runs the walk and greedy expansion on each view's aligned block, then
/// unifies the picks. `radius` defaults per view to [`default_radius`].
pub fn select_anchors(
    corrupted: &CorruptedDataset,
    n_anchors: usize,
    radius: Option<f64>,
    cfg: &WalkConfig,
) -> Result<AnchorSet> {
    let aligned = corrupted.aligned_count;
    if n_anchors > aligned {
        return Err(Error::invalid(format!(
            "aligned block has {aligned} rows, fewer than the {n_anchors} anchors requested"
        )));
    }
    let blocks: Vec<ModalityMatrix> = (0..corrupted.views.len())
        .map(|v| corrupted.aligned_block(v))
        .collect();
    let mut per_view = Vec::with_capacity(blocks.len());
    let mut radii = Vec::with_capacity(blocks.len());
    let mut scores = Vec::with_capacity(blocks.len());
    let mut backends = Vec::with_capacity(blocks.len());
    for (v, block) in blocks.iter().enumerate() {
        let (s, backend) = view_visit_scores(block, cfg)?;
        let d = radius.unwrap_or_else(|| default_radius(block, cfg.seed.wrapping_add(v as u64)));
        per_view.push(greedy_expand(block, &s, d, n_anchors)?);
        radii.push(d);
        scores.push(s);
        backends.push(backend);
    }
    let unified = unify_indices(&per_view, aligned)?;
    let anchors = blocks.iter().map(|b| b.select_rows(&unified)).collect();
    Ok(AnchorSet {
        per_view_indices: per_view,
        unified,
        anchors,
        radii,
        scores,
        backends,
    })
}
