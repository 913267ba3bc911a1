use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::{self, dot, norm};
use crate::{Error, Result};

/// Paired rows with a binary label: `true` for corresponding (positive)
/// pairs, `false` for negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    left: Array2<f64>,
    right: Array2<f64>,
    labels: Vec<bool>,
}

impl PairBatch {
    pub fn new(left: Array2<f64>, right: Array2<f64>, labels: Vec<bool>) -> Result<Self> {
        if left.nrows() == 0 || left.nrows() != right.nrows() || left.nrows() != labels.len() {
            return Err(Error::shape(format!(
                "pair batch needs equal non-zero lengths, got {}/{}/{}",
                left.nrows(),
                right.nrows(),
                labels.len()
            )));
        }
        Ok(PairBatch { left, right, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn left(&self) -> ArrayView2<'_, f64> {
        self.left.view()
    }

    pub fn right(&self) -> ArrayView2<'_, f64> {
        self.right.view()
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub margin: f64,
    /// Width of the region where negative pairs are penalized; the
    /// negative term vanishes once `D_c^2 >= a * margin`.
    pub a: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub neg_ratio: f64,
    pub seed: u64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            margin: 1.0,
            a: 2.0,
            learning_rate: 1e-3,
            epochs: 200,
            neg_ratio: 1.0,
            seed: 0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.margin > 0.0
            && self.a > 0.0
            && self.learning_rate > 0.0
            && self.epochs >= 1
            && self.neg_ratio >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid loss config {self:?}")))
        }
    }
}

pub fn euclidean_distance(u: ArrayView1<f64>, v: ArrayView1<f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::shape(format!("lengths {} and {}", u.len(), v.len())));
    }
    Ok(util::sq_dist(u, v).sqrt())
}

/// `1 - cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: ArrayView1<f64>, v: ArrayView1<f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::shape(format!("lengths {} and {}", u.len(), v.len())));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::degenerate("cosine distance of a zero vector"));
    }
    Ok((1.0 - dot(u, v) / (nu * nv)).clamp(0.0, 2.0))
}

/// Mean of `D^2` over positives and `max(m - D, 0)^2` over negatives, with
/// Euclidean `D`.
pub fn contrastive_loss(batch: &PairBatch, margin: f64) -> Result<f64> {
    let mut total = 0.0;
    for ((u, v), &pos) in batch.left.rows().into_iter().zip(batch.right.rows()).zip(&batch.labels) {
        let d = euclidean_distance(u, v)?;
        total += if pos { d * d } else { (margin - d).max(0.0).powi(2) };
    }
    Ok(total / batch.len() as f64)
}

/// Per-pair term of the noise-contrastive loss before the `1 / 2n` factor.
pub(crate) fn noise_term(d: f64, positive: bool, margin: f64, a: f64) -> f64 {
    if positive {
        d * d
    } else {
        (d * (a * margin - d * d)).max(0.0).powi(2) / margin
    }
}

/// Derivative of [`noise_term`] with respect to `d`.
pub(crate) fn noise_term_grad(d: f64, positive: bool, margin: f64, a: f64) -> f64 {
    if positive {
        2.0 * d
    } else {
        let g = d * (a * margin - d * d);
        if g > 0.0 {
            2.0 * g * (a * margin - 3.0 * d * d) / margin
        } else {
            0.0
        }
    }
}

/// `1/(2n) * sum [Y D_c^2 + (1 - Y) / m * max(a m D_c - D_c^3, 0)^2]` with
/// cosine distance `D_c`. The cubic term keeps close negatives (likely false
/// negatives) from dominating.
pub fn noise_contrastive_loss(batch: &PairBatch, margin: f64, a: f64) -> Result<f64> {
    if !(margin > 0.0 && a > 0.0) {
        return Err(Error::invalid(format!("need m > 0 and a > 0, got m={margin}, a={a}")));
    }
    let mut total = 0.0;
    for ((u, v), &pos) in batch.left.rows().into_iter().zip(batch.right.rows()).zip(&batch.labels) {
        total += noise_term(cosine_distance(u, v)?, pos, margin, a);
    }
    Ok(total / (2.0 * batch.len() as f64))
}

/// Index pairs into the aligned blocks: `(i, i)` positives first, then
/// `floor(neg_ratio * A)` negatives `(i, j)` with `j != i`.
pub fn sample_pair_indices(rows: usize, neg_ratio: f64, seed: u64) -> Result<(Vec<(usize, usize)>, Vec<bool>)> {
    if rows < 2 {
        return Err(Error::invalid(format!("need at least 2 aligned rows, got {rows}")));
    }
    if !(neg_ratio >= 0.0) {
        return Err(Error::invalid(format!("neg_ratio must be >= 0, got {neg_ratio}")));
    }
    let negatives = (neg_ratio * rows as f64 + 1e-9).floor() as usize;
    let mut rng = util::rng(seed);
    let mut pairs: Vec<(usize, usize)> = (0..rows).map(|i| (i, i)).collect();
    for _ in 0..negatives {
        let i = rng.random_range(0..rows);
        let mut j = rng.random_range(0..rows - 1);
        if j >= i {
            j += 1;
        }
        pairs.push((i, j));
    }
    let mut labels = vec![true; rows];
    labels.resize(rows + negatives, false);
    Ok((pairs, labels))
}

/// Positive and negative pairs built from two aligned blocks.
pub fn sample_pairs(
    left_aligned: ArrayView2<f64>,
    right_aligned: ArrayView2<f64>,
    neg_ratio: f64,
    seed: u64,
) -> Result<PairBatch> {
    if left_aligned.nrows() != right_aligned.nrows() {
        return Err(Error::shape("aligned blocks differ in row count"));
    }
    let (pairs, labels) = sample_pair_indices(left_aligned.nrows(), neg_ratio, seed)?;
    let li: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let ri: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    PairBatch::new(
        left_aligned.select(ndarray::Axis(0), &li),
        right_aligned.select(ndarray::Axis(0), &ri),
        labels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn single(u: Vec<f64>, v: Vec<f64>, pos: bool) -> PairBatch {
        let d = u.len();
        PairBatch::new(
            Array2::from_shape_vec((1, d), u).unwrap(),
            Array2::from_shape_vec((1, d), v).unwrap(),
            vec![pos],
        )
        .unwrap()
    }

    // unit vectors whose cosine distance is exactly `d` (for d in [0, 2])
    fn at_distance(d: f64, pos: bool) -> PairBatch {
        let c = 1.0 - d;
        single(vec![1.0, 0.0], vec![c, (1.0 - c * c).max(0.0).sqrt()], pos)
    }

    #[test]
    fn distances() {
        let z = array![0.0, 0.0];
        assert_eq!(euclidean_distance(z.view(), z.view()).unwrap(), 0.0);
        let v = array![3.0, 4.0];
        assert_eq!(euclidean_distance(z.view(), v.view()).unwrap(), 5.0);
        assert_eq!(euclidean_distance(v.view(), z.view()).unwrap(), 5.0);
        assert!(euclidean_distance(v.view(), array![1.0].view()).is_err());

        let u = array![1.0, 2.0];
        assert!(cosine_distance(u.view(), u.view()).unwrap().abs() < 1e-15);
        assert_eq!(cosine_distance(array![1.0, 0.0].view(), array![0.0, 5.0].view()).unwrap(), 1.0);
        assert!((cosine_distance(u.view(), (-&u).view()).unwrap() - 2.0).abs() < 1e-15);
        assert!(cosine_distance(u.view(), z.view()).is_err());
    }

    #[test]
    fn contrastive_examples() {
        assert_eq!(contrastive_loss(&single(vec![1.0, 2.0], vec![1.0, 2.0], true), 1.0).unwrap(), 0.0);
        assert_eq!(contrastive_loss(&single(vec![0.0], vec![1.5], false), 1.0).unwrap(), 0.0);
        let l = contrastive_loss(&single(vec![0.0], vec![0.4], false), 1.0).unwrap();
        assert!((l - 0.36).abs() < 1e-12);
    }

    #[test]
    fn noise_contrastive_examples() {
        assert!(noise_contrastive_loss(&single(vec![2.0, 1.0], vec![4.0, 2.0], true), 1.0, 2.0).unwrap() < 1e-30);
        assert_eq!(noise_contrastive_loss(&at_distance(1.2, false), 1.0, 1.0).unwrap(), 0.0);
        // 1/(2*1) * (1/1) * (0.5 - 0.125)^2
        let l = noise_contrastive_loss(&at_distance(0.5, false), 1.0, 1.0).unwrap();
        assert!((l - 0.0703125).abs() < 1e-12, "{l}");
    }

    #[test]
    fn negative_term_vanishes_exactly_past_threshold() {
        for &a in &[0.5, 1.0, 2.0, 3.0] {
            for &m in &[0.25, 1.0, 1.7] {
                for step in 0..=40 {
                    let d = step as f64 * 0.05;
                    let zero = noise_term(d, false, m, a) == 0.0;
                    assert_eq!(zero, d == 0.0 || d * d >= a * m, "a={a} m={m} d={d}");
                }
            }
        }
    }

    #[test]
    fn term_gradient_matches_difference() {
        for &d in &[0.1, 0.5, 0.9, 1.3] {
            for pos in [true, false] {
                let h = 1e-6;
                let fd = (noise_term(d + h, pos, 1.0, 2.0) - noise_term(d - h, pos, 1.0, 2.0)) / (2.0 * h);
                assert!((fd - noise_term_grad(d, pos, 1.0, 2.0)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pair_construction() {
        let x = Array2::from_shape_fn((5, 2), |(i, j)| (i * 2 + j) as f64);
        let b = sample_pairs(x.view(), x.view(), 1.0, 3).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.labels(), &[true, true, true, true, true, false, false, false, false, false]);
        for r in 5..10 {
            assert_ne!(b.left().row(r), b.right().row(r));
        }
        assert_eq!(sample_pairs(x.view(), x.view(), 0.0, 3).unwrap().len(), 5);
        assert!(sample_pairs(x.slice(ndarray::s![..1, ..]), x.slice(ndarray::s![..1, ..]), 1.0, 0).is_err());
    }

    #[test]
    fn losses_are_nonnegative() {
        use rand::Rng;
        let mut rng = util::rng(7);
        for _ in 0..50 {
            let l = Array2::from_shape_fn((6, 3), |_| rng.random::<f64>() - 0.5);
            let r = Array2::from_shape_fn((6, 3), |_| rng.random::<f64>() - 0.5);
            let y = (0..6).map(|_| rng.random::<bool>()).collect();
            let b = PairBatch::new(l, r, y).unwrap();
            assert!(contrastive_loss(&b, 1.0).unwrap() >= 0.0);
            assert!(noise_contrastive_loss(&b, 1.0, 2.0).unwrap() >= 0.0);
        }
    }
}
