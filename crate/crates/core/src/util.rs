use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) type StdRng = ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> StdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: ArrayView1<f64>) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Rows scaled to unit length. `None` when some row has zero norm.
pub(crate) fn unit_rows(x: ArrayView2<f64>) -> Option<Array2<f64>> {
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        let n = norm(row.view());
        if n == 0.0 {
            return None;
        }
        row.mapv_inplace(|v| v / n);
    }
    Some(out)
}

/// Euclidean distances between distinct rows: every pair when there are at
/// most `cap` of them, otherwise `cap` pairs drawn with the seeded generator.
pub(crate) fn sampled_pair_distances(x: ArrayView2<f64>, cap: usize, seed: u64) -> Vec<f64> {
    let n = x.nrows();
    if n < 2 {
        return Vec::new();
    }
    let total = n * (n - 1) / 2;
    if total <= cap {
        let mut out = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                out.push(sq_dist(x.row(i), x.row(j)).sqrt());
            }
        }
        return out;
    }
    let mut rng = rng(seed);
    (0..cap)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            sq_dist(x.row(i), x.row(j)).sqrt()
        })
        .collect()
}

/// Linear-interpolated quantile, `q` in [0, 1]. Sorts `values` in place.
pub(crate) fn quantile(values: &mut [f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(values[lo] * (1.0 - frac) + values[hi] * frac)
}
