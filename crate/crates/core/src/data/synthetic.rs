use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ModalityMatrix, MultimodalDataset};
use crate::util::{self, StdRng};
use crate::{Error, Result};

/// Gaussian-blob generator parameters. Within-cluster std is 1, so
/// `separation` is the minimum distance between cluster means in std units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub k: usize,
    pub n: usize,
    pub dims: Vec<usize>,
    pub separation: f64,
    pub seed: u64,
}

// Means live in [MEAN_FLOOR, MEAN_FLOOR + side]^d, so features are almost
// always nonnegative, the way bag-of-words or histogram views are.
const MEAN_FLOOR: f64 = 4.0;

fn draw_means(rng: &mut StdRng, k: usize, d: usize, separation: f64) -> Vec<Vec<f64>> {
    let min_sq = separation * separation;
    let mut side = separation * (k as f64).powf(1.0 / d as f64);
    let mut failures = 0usize;
    loop {
        let means: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..d)
                    .map(|_| MEAN_FLOOR + side * rng.random::<f64>())
                    .collect()
            })
            .collect();
        let ok = (0..k).all(|a| {
            (a + 1..k).all(|b| {
                let sq: f64 = means[a]
                    .iter()
                    .zip(&means[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                sq >= min_sq
            })
        });
        if ok {
            return means;
        }
        failures += 1;
        if failures % 64 == 0 {
            side *= 1.1;
        }
    }
}

/// Balanced `k`-class dataset; every view draws its own cluster means but all
/// views share the label vector. Bit-identical for equal specs.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultimodalDataset> {
    let SyntheticSpec {
        k,
        n,
        ref dims,
        separation,
        seed,
    } = *spec;
    if k < 2 {
        return Err(Error::invalid(format!("need k >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::invalid(format!("need n >= k, got n={n}, k={k}")));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid(format!("every view needs >= 1 feature, got {dims:?}")));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::invalid(format!("separation must be > 0, got {separation}")));
    }

    let mut rng = util::rng(seed);
    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    labels.shuffle(&mut rng);

    let mut views = Vec::with_capacity(dims.len());
    for &d in dims {
        let means = draw_means(&mut rng, k, d, separation);
        let mut x = Array2::zeros((n, d));
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            let mu = &means[labels[i]];
            for (j, v) in row.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *v = mu[j] + z;
            }
        }
        views.push(ModalityMatrix::new(x)?);
    }
    MultimodalDataset::new(views, labels)
}
