use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::Serialize;

use crate::util::{self, sq_dist, StdRng};
use crate::{Error, Result};

const MAX_ITER: usize = 300;
const SHIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub history: Vec<f64>,
    #[serde(skip)]
    pub centroids: Array2<f64>,
}

fn plus_plus(x: ArrayView2<f64>, k: usize, rng: &mut StdRng) -> Array2<f64> {
    let n = x.nrows();
    let mut centroids = Array2::zeros((k, x.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&x.row(first));
    let mut nearest: Vec<f64> = x.rows().into_iter().map(|r| sq_dist(r, x.row(first))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, d) in nearest.iter().enumerate() {
                if t < *d {
                    idx = i;
                    break;
                }
                t -= d;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&x.row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    centroids
}

fn assign(x: ArrayView2<f64>, centroids: &Array2<f64>, labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for (i, row) in x.rows().into_iter().enumerate() {
        let (best, d) = centroids
            .rows()
            .into_iter()
            .enumerate()
            .map(|(c, ctr)| (c, sq_dist(row, ctr)))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        labels[i] = best;
        dists[i] = d;
        inertia += d;
    }
    inertia
}

fn lloyd(x: ArrayView2<f64>, k: usize, rng: &mut StdRng) -> KMeansFit {
    let n = x.nrows();
    let mut centroids = plus_plus(x, k, rng);
    let mut labels = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..MAX_ITER {
        history.push(assign(x, &centroids, &mut labels, &mut dists));
        let mut next = Array2::zeros(centroids.raw_dim());
        let mut counts = vec![0usize; k];
        for (i, row) in x.rows().into_iter().enumerate() {
            next.row_mut(labels[i]).scaled_add(1.0, &row);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                next.row_mut(c).mapv_inplace(|v| v / counts[c] as f64);
            } else {
                // reseed an empty cluster at the worst-served point
                let far = dists
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, d)| if *d > dists[best] { i } else { best });
                next.row_mut(c).assign(&x.row(far));
                dists[far] = 0.0;
            }
        }
        let shift = next
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| sq_dist(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = next;
        if shift < SHIFT_TOL {
            break;
        }
    }
    let inertia = assign(x, &centroids, &mut labels, &mut dists);
    history.push(inertia);
    KMeansFit {
        labels,
        inertia,
        history,
        centroids,
    }
}

/// Best of `restarts` seeded k-means++ runs (lowest inertia, earliest restart
/// on ties).
pub fn kmeans(x: ArrayView2<f64>, k: usize, seed: u64, restarts: usize) -> Result<KMeansFit> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if x.nrows() < k {
        return Err(Error::invalid(format!("{} rows cannot form {k} clusters", x.nrows())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let mut seeds = util::rng(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts.max(1) {
        let mut rng = util::rng(seeds.random());
        let fit = lloyd(x, k, &mut rng);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}
