//! Visit scores from a self-repellent random walk over the cosine graph of
//! one view.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::ModalityMatrix;
use crate::util::{dot, unit_rows};
use crate::{Error, Result};

/// Number of walks and steps per walk for a view with `n` samples.
pub fn walk_schedule(n: usize) -> (usize, usize) {
    match n {
        0..=99 => (20, 3),
        100..=999 => (10, 5),
        1000..=9999 => (5, 10),
        _ => (3, 20),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Self-repellence strength; 0 disables the decay.
    pub alpha: f64,
    /// `(walks, steps)` replacing [`walk_schedule`].
    pub schedule_override: Option<(usize, usize)>,
    /// Starting distribution; uniform when `None`.
    pub initial_distribution: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            alpha: 0.5,
            schedule_override: None,
            initial_distribution: None,
            seed: 0,
        }
    }
}

impl WalkConfig {
    fn schedule(&self, n: usize) -> (usize, usize) {
        self.schedule_override.unwrap_or_else(|| walk_schedule(n))
    }

    fn start(&self, n: usize) -> Result<Vec<f64>> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        match &self.initial_distribution {
            None => Ok(vec![1.0 / n as f64; n]),
            Some(pi) => {
                if pi.len() != n {
                    return Err(Error::shape(format!(
                        "initial distribution has {} entries for {n} nodes",
                        pi.len()
                    )));
                }
                let sum: f64 = pi.iter().sum();
                if pi.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("initial distribution must be nonnegative and sum to 1"));
                }
                Ok(pi.clone())
            }
        }
    }
}

/// Row-stochastic matrix with zero diagonal built from clipped cosine
/// similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(Array2<f64>);

impl TransitionMatrix {
    /// Validates the stochastic invariants before wrapping `p`.
    pub fn new(p: Array2<f64>) -> Result<Self> {
        let n = p.nrows();
        if n < 2 || p.ncols() != n {
            return Err(Error::shape(format!("transition matrix must be square with n >= 2, got {:?}", p.dim())));
        }
        for (i, row) in p.axis_iter(Axis(0)).enumerate() {
            if row[i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            if row.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::invalid(format!("negative or NaN entry in row {i}")));
            }
            if (row.sum() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("row {i} sums to {}", row.sum())));
            }
        }
        Ok(TransitionMatrix(p))
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }
}

/// Pairwise cosine similarity, negatives clipped to 0, zero diagonal, rows
/// normalized. A row with no positive similarity becomes uniform over the
/// other nodes.
pub fn transition_matrix(x: &ModalityMatrix) -> Result<TransitionMatrix> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::shape("transition matrix needs at least 2 samples"));
    }
    let unit = unit_rows(x.values()).ok_or_else(|| Error::degenerate("all-zero feature row"))?;
    let mut p = unit.dot(&unit.t());
    for (i, mut row) in p.axis_iter_mut(Axis(0)).enumerate() {
        row.mapv_inplace(|c| c.max(0.0));
        row[i] = 0.0;
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|c| c / s);
        } else {
            row.fill(1.0 / (n - 1) as f64);
            row[i] = 0.0;
        }
    }
    TransitionMatrix::new(p)
}

/// `(x / mu)^(-alpha)`.
pub fn decay_factor(x: f64, mu: f64, alpha: f64) -> Result<f64> {
    if !(x > 0.0) || !(mu > 0.0) {
        return Err(Error::invalid(format!("decay needs x > 0 and mu > 0, got x={x}, mu={mu}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    Ok((x / mu).powf(-alpha))
}

/// Accumulated visit mass per node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisitScores(pub Vec<f64>);

impl VisitScores {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Nonnegative similarity weights `S` whose row-normalization is the walk's
/// transition matrix. Only two products are needed, so `S` never has to be
/// materialized.
pub(crate) trait WalkKernel {
    fn len(&self) -> usize;
    /// `sum_j S[i, j] * r[j]` for every `i`.
    fn weighted_row_sums(&self, r: &[f64]) -> Vec<f64>;
    /// `sum_i q[i] * S[i, j]` for every `j`.
    fn apply_transpose(&self, q: &[f64]) -> Vec<f64>;
}

impl WalkKernel for TransitionMatrix {
    fn len(&self) -> usize {
        self.0.nrows()
    }

    fn weighted_row_sums(&self, r: &[f64]) -> Vec<f64> {
        self.0.dot(&Array1::from(r.to_vec())).to_vec()
    }

    fn apply_transpose(&self, q: &[f64]) -> Vec<f64> {
        Array1::from(q.to_vec()).dot(&self.0).to_vec()
    }
}

/// Exact low-rank form of the cosine kernel, `S = U U^T - I`, usable when no
/// cosine is negative (so clipping is a no-op). Each product costs
/// `O(n * d)` instead of `O(n^2)`.
#[derive(Debug, Clone)]
pub(crate) struct CosineKernel {
    unit: Array2<f64>,
    // Rows orthogonal to every other row; their kernel row is replaced by
    // ones off the diagonal, matching the dense fallback.
    isolated: Vec<bool>,
}

// cos(45 deg): rows within this angle of a common axis are pairwise within 90.
const CONE_COS: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl CosineKernel {
    /// `None` unless every pairwise cosine is provably nonnegative: either all
    /// features are nonnegative or every row lies within 45 degrees of the
    /// mean direction.
    pub(crate) fn try_new(x: &ModalityMatrix) -> Option<Self> {
        let n = x.n_rows();
        if n < 2 {
            return None;
        }
        let unit = unit_rows(x.values())?;
        let nonneg = x.values().iter().all(|v| *v >= 0.0);
        if !nonneg {
            let axis = unit.sum_axis(Axis(0));
            let len = axis.dot(&axis).sqrt();
            if len == 0.0 {
                return None;
            }
            let inside = unit
                .axis_iter(Axis(0))
                .all(|row| dot(row, axis.view()) / len >= CONE_COS + 1e-12);
            if !inside {
                return None;
            }
        }
        let total = unit.sum_axis(Axis(0));
        let isolated = unit
            .axis_iter(Axis(0))
            .map(|row| dot(row, total.view()) - dot(row, row) <= 1e-12 * n as f64)
            .collect();
        Some(CosineKernel { unit, isolated })
    }

    fn weighted_sum(&self, w: &[f64]) -> Array1<f64> {
        let mut g = Array1::zeros(self.unit.ncols());
        for ((row, &wi), &iso) in self.unit.axis_iter(Axis(0)).zip(w).zip(&self.isolated) {
            if !iso {
                g.scaled_add(wi, &row);
            }
        }
        g
    }
}

impl WalkKernel for CosineKernel {
    fn len(&self) -> usize {
        self.unit.nrows()
    }

    fn weighted_row_sums(&self, r: &[f64]) -> Vec<f64> {
        let g = self.weighted_sum(r);
        let total: f64 = r.iter().sum();
        self.unit
            .axis_iter(Axis(0))
            .zip(r)
            .zip(&self.isolated)
            .map(|((row, &ri), &iso)| {
                if iso {
                    total - ri
                } else {
                    (dot(row, g.view()) - ri).max(0.0)
                }
            })
            .collect()
    }

    fn apply_transpose(&self, q: &[f64]) -> Vec<f64> {
        let g = self.weighted_sum(q);
        let iso_mass: f64 = q.iter().zip(&self.isolated).filter(|(_, &i)| i).map(|(v, _)| v).sum();
        self.unit
            .axis_iter(Axis(0))
            .zip(q)
            .zip(&self.isolated)
            .map(|((row, &qj), &iso)| {
                if iso {
                    iso_mass - qj
                } else {
                    (dot(row, g.view()) - qj).max(0.0) + iso_mass
                }
            })
            .collect()
    }
}

/// Walk distribution propagation shared by both kernels.
///
/// Each walk restarts from `pi`. Before walk `w`, column `j` of the kernel is
/// scaled by `decay_factor(V[j] + 1, mean(V) + 1, alpha)` and rows are
/// renormalized, so nodes that already hold visit mass become less
/// attractive. Each step moves the distribution one hop, `p <- P'^T p`, and
/// its mass is added to `V`.
pub(crate) fn walk_visits<K: WalkKernel>(kernel: &K, cfg: &WalkConfig) -> Result<VisitScores> {
    let n = kernel.len();
    let pi = cfg.start(n)?;
    let (walks, steps) = cfg.schedule(n);
    let mut visits = vec![0.0; n];
    let mut repel = vec![1.0; n];
    for _ in 0..walks {
        if cfg.alpha > 0.0 {
            let mu = visits.iter().sum::<f64>() / n as f64 + 1.0;
            for (r, v) in repel.iter_mut().zip(&visits) {
                *r = decay_factor(v + 1.0, mu, cfg.alpha)?;
            }
        }
        let row_sums = kernel.weighted_row_sums(&repel);
        let mut p = pi.clone();
        for _ in 0..steps {
            let q: Vec<f64> = p
                .iter()
                .zip(&row_sums)
                .map(|(pi, s)| if *s > 0.0 { pi / s } else { 0.0 })
                .collect();
            p = kernel
                .apply_transpose(&q)
                .into_iter()
                .zip(&repel)
                .map(|(v, r)| v * r)
                .collect();
            for (acc, v) in visits.iter_mut().zip(&p) {
                *acc += v;
            }
        }
    }
    if visits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("visit scores".into()));
    }
    Ok(VisitScores(visits))
}

/// Visit scores on an explicit transition matrix.
pub fn self_repellent_visit_scores(p: &TransitionMatrix, cfg: &WalkConfig) -> Result<VisitScores> {
    walk_visits(p, cfg)
}

/// Which kernel [`view_visit_scores`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WalkBackend {
    LowRank,
    Dense,
}

/// Visit scores straight from a view. Uses the low-rank cosine kernel when
/// no pairwise cosine can be negative, otherwise builds the dense
/// [`TransitionMatrix`]. Both produce the same scores.
pub fn view_visit_scores(x: &ModalityMatrix, cfg: &WalkConfig) -> Result<(VisitScores, WalkBackend)> {
    match CosineKernel::try_new(x) {
        Some(k) => Ok((walk_visits(&k, cfg)?, WalkBackend::LowRank)),
        None => {
            let p = transition_matrix(x)?;
            Ok((walk_visits(&p, cfg)?, WalkBackend::Dense))
        }
    }
}
