use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{cost_rows, hungarian, Reordered};
use crate::util::{quantile, sampled_pair_distances, sq_dist, unit_rows};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Bandwidth; median pairwise distance of the short view when `None`.
    pub sigma: Option<f64>,
    pub seed: u64,
}

/// Median of (up to 2000 sampled) pairwise Euclidean distances.
pub fn default_sigma(rows: ArrayView2<f64>, seed: u64) -> f64 {
    let mut d = sampled_pair_distances(rows, 2000, seed);
    match quantile(&mut d, 0.5) {
        Some(m) if m > 0.0 => m,
        _ => 1.0,
    }
}

/// `exp(-0.5 * (|x - xi| / sigma)^2)`.
pub fn gaussian_kernel(x: ArrayView1<f64>, xi: ArrayView1<f64>, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    if x.len() != xi.len() {
        return Err(Error::shape("kernel arguments differ in length"));
    }
    Ok((-0.5 * sq_dist(x, xi) / (sigma * sigma)).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolated {
    pub value: Array1<f64>,
    pub weights: Vec<f64>,
}

/// Kernel-weighted average of `bounding` evaluated at their mean. For two
/// bounding rows the target is their midpoint, so both weights are 1/2.
pub fn interpolate_point(bounding: &[ArrayView1<f64>], sigma: f64) -> Result<Interpolated> {
    let first = bounding.first().ok_or_else(|| Error::invalid("no rows to interpolate between"))?;
    let mut target = Array1::zeros(first.len());
    for row in bounding {
        if row.len() != first.len() {
            return Err(Error::shape("bounding rows differ in length"));
        }
        target += row;
    }
    target /= bounding.len() as f64;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    // log-domain so far-apart rows do not underflow every weight to zero
    let logs: Vec<f64> = bounding
        .iter()
        .map(|row| -0.5 * sq_dist(target.view(), *row) / (sigma * sigma))
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mut value = Array1::zeros(first.len());
    for (row, w) in bounding.iter().zip(&weights) {
        value.scaled_add(*w, row);
    }
    Ok(Interpolated { value, weights })
}

/// Slots `j` (between sorted rows `j` and `j + 1`) with the largest jumps
/// `d[j + 1] - d[j]`, ties to the smaller `j`. When `n_k` exceeds the
/// available slots they are reused round-robin in the same ranking.
pub fn select_gap_indices(sorted_distances: &[f64], n_k: usize) -> Result<Vec<usize>> {
    if n_k == 0 {
        return Ok(Vec::new());
    }
    if sorted_distances.len() < 2 {
        return Err(Error::degenerate(format!(
            "{n_k} rows to synthesize but the short view has {} rows",
            sorted_distances.len()
        )));
    }
    let mut ranked: Vec<(f64, usize)> = sorted_distances
        .windows(2)
        .enumerate()
        .map(|(j, w)| (w[1] - w[0], j))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(ranked.iter().map(|r| r.1).cycle().take(n_k).collect())
}

/// The short view padded up to the long view's size and matched one-to-one
/// against it.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedAlignment {
    /// `n_l x h`, in sorted order with synthesized rows inserted.
    pub padded_short: Array2<f64>,
    /// `n_l x n_l` expanded cost, rows aligned with `padded_short`.
    pub expanded_cost: Array2<f64>,
    pub synth_flags: Vec<bool>,
    /// Original short-view row of each padded row (`None` if synthesized).
    pub source_rows: Vec<Option<usize>>,
    /// `(long_row, padded_row)` for every long row, sorted by long row.
    pub final_pairs: Vec<(usize, usize)>,
    pub sigma: f64,
}

impl PaddedAlignment {
    pub fn synthesized(&self) -> usize {
        self.synth_flags.iter().filter(|&&s| s).count()
    }
}

/// Inserts `n_l - n_s` interpolated rows into the short view at the largest
/// distance gaps, extends `Z^r` to a square matrix with fresh cosine costs
/// for the new rows, and runs the Hungarian algorithm on its transpose.
pub fn pad_and_realign(
    latent_short: ArrayView2<f64>,
    latent_long: ArrayView2<f64>,
    reordered: &Reordered,
    kcfg: &KernelConfig,
) -> Result<PaddedAlignment> {
    let n_s = latent_short.nrows();
    let n_l = latent_long.nrows();
    if reordered.order.len() != n_s || reordered.z_r.dim() != (n_s, n_l) {
        return Err(Error::shape(format!(
            "reordered cost is {:?} for {n_s} short and {n_l} long rows",
            reordered.z_r.dim()
        )));
    }
    if n_l < n_s {
        return Err(Error::invalid("short view has more rows than the long view"));
    }
    if latent_short.ncols() != latent_long.ncols() {
        return Err(Error::shape("latent widths differ"));
    }
    let sigma = match kcfg.sigma {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::invalid(format!("sigma must be > 0, got {s}"))),
        None => default_sigma(latent_short, kcfg.seed),
    };
    let n_k = n_l - n_s;
    let slots = select_gap_indices(&reordered.distances, n_k)?;
    let mut per_slot = vec![0usize; n_s];
    for &s in &slots {
        per_slot[s] += 1;
    }

    let sorted_short = latent_short.select(Axis(0), &reordered.order);
    let long_unit = unit_rows(latent_long).ok_or_else(|| Error::degenerate("zero latent row in long view"))?;
    let h = latent_short.ncols();
    let mut padded = Array2::zeros((n_l, h));
    let mut expanded = Array2::zeros((n_l, n_l));
    let mut flags = Vec::with_capacity(n_l);
    let mut sources = Vec::with_capacity(n_l);
    let mut at = 0;
    for r in 0..n_s {
        padded.row_mut(at).assign(&sorted_short.row(r));
        expanded.row_mut(at).assign(&reordered.z_r.row(r));
        flags.push(false);
        sources.push(Some(reordered.order[r]));
        at += 1;
        if per_slot[r] == 0 {
            continue;
        }
        let point = interpolate_point(&[sorted_short.row(r), sorted_short.row(r + 1)], sigma)?;
        let unit = unit_rows(point.value.view().insert_axis(Axis(0)))
            .ok_or_else(|| Error::degenerate("interpolated a zero latent row"))?;
        let cost = cost_rows(unit.view(), long_unit.view());
        for _ in 0..per_slot[r] {
            padded.row_mut(at).assign(&point.value);
            expanded.row_mut(at).assign(&cost.row(0));
            flags.push(true);
            sources.push(None);
            at += 1;
        }
    }
    debug_assert_eq!(at, n_l);

    let matching = hungarian(expanded.t())?;
    Ok(PaddedAlignment {
        padded_short: padded,
        expanded_cost: expanded,
        synth_flags: flags,
        source_rows: sources,
        final_pairs: matching.pairs,
        sigma,
    })
}

/// Fused features and the labels used to score them.
#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    /// Long-view row behind each fused row.
    pub long_rows: Vec<usize>,
}

/// `short[s] || long[l]` for each `(s, l)` in `pairs`, labelled with the
/// long view's labels. Rows come out in ascending long-row order.
pub fn fuse_pairs(
    short: ArrayView2<f64>,
    long: ArrayView2<f64>,
    pairs: &[(usize, usize)],
    long_labels: &[usize],
) -> Result<Fused> {
    if long_labels.len() != long.nrows() {
        return Err(Error::shape("long-view labels do not match its rows"));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by_key(|p| p.1);
    if sorted.iter().any(|&(s, l)| s >= short.nrows() || l >= long.nrows()) {
        return Err(Error::shape("pair index out of range"));
    }
    let si: Vec<usize> = sorted.iter().map(|p| p.0).collect();
    let li: Vec<usize> = sorted.iter().map(|p| p.1).collect();
    let features = concatenate(Axis(1), &[short.select(Axis(0), &si).view(), long.select(Axis(0), &li).view()])
        .map_err(|e| Error::shape(e.to_string()))?;
    Ok(Fused {
        features,
        labels: li.iter().map(|&l| long_labels[l]).collect(),
        long_rows: li,
    })
}

/// Concatenates every long-view row with its matched padded short row.
pub fn fuse(padded: &PaddedAlignment, latent_long: ArrayView2<f64>, long_labels: &[usize]) -> Result<Fused> {
    if padded.final_pairs.len() != latent_long.nrows() {
        return Err(Error::shape(format!(
            "matching has {} pairs for {} long rows",
            padded.final_pairs.len(),
            latent_long.nrows()
        )));
    }
    let pairs: Vec<(usize, usize)> = padded.final_pairs.iter().map(|&(l, p)| (p, l)).collect();
    fuse_pairs(padded.padded_short.view(), latent_long, &pairs, long_labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{build_cost_matrix, reorder_rows};
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn kernel_values() {
        let x = array![1.0, 2.0];
        assert_eq!(gaussian_kernel(x.view(), x.view(), 0.3).unwrap(), 1.0);
        let y = array![1.0, 4.0];
        let k = gaussian_kernel(x.view(), y.view(), 2.0).unwrap();
        assert!((k - 0.6065306597126334).abs() < 1e-12);
        let z = array![1.0, 5.0];
        assert!(gaussian_kernel(x.view(), z.view(), 2.0).unwrap() < k);
        assert!(gaussian_kernel(x.view(), y.view(), 0.0).is_err());
    }

    #[test]
    fn midpoint_interpolation() {
        let u = array![1.0, 3.0, -2.0];
        let v = array![5.0, -1.0, 4.0];
        let p = interpolate_point(&[u.view(), v.view()], 0.7).unwrap();
        assert_eq!(p.weights, vec![0.5, 0.5]);
        assert_eq!(p.value, array![3.0, 1.0, 1.0]);
        let single = interpolate_point(&[u.view()], 0.7).unwrap();
        assert_eq!(single.value, u);
        assert!(interpolate_point(&[], 1.0).is_err());
    }

    #[test]
    fn weights_normalized_in_hull() {
        let mut rng = crate::util::rng(4);
        for _ in 0..100 {
            let u = Array1::from_shape_fn(5, |_| rng.random::<f64>() * 10.0 - 5.0);
            let v = Array1::from_shape_fn(5, |_| rng.random::<f64>() * 10.0 - 5.0);
            let sigma = rng.random::<f64>() * 3.0 + 1e-3;
            let p = interpolate_point(&[u.view(), v.view()], sigma).unwrap();
            assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..5 {
                let (lo, hi) = (u[i].min(v[i]), u[i].max(v[i]));
                assert!(p.value[i] >= lo - 1e-12 && p.value[i] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn gap_selection() {
        assert_eq!(select_gap_indices(&[0.1, 0.15, 0.8], 1).unwrap(), vec![1]);
        assert_eq!(select_gap_indices(&[0.0, 0.25, 0.5, 0.75], 1).unwrap(), vec![0]);
        assert!(select_gap_indices(&[0.1, 0.2], 0).unwrap().is_empty());
        assert_eq!(select_gap_indices(&[0.1, 0.15, 0.8], 5).unwrap(), vec![1, 0, 1, 0, 1]);
        assert!(select_gap_indices(&[0.1], 1).is_err());
    }

    fn padded_for(short: &Array2<f64>, long: &Array2<f64>) -> PaddedAlignment {
        let cost = build_cost_matrix(short.view(), long.view()).unwrap();
        let a = hungarian(cost.z.view()).unwrap();
        let r = reorder_rows(&cost, &a).unwrap();
        pad_and_realign(short.view(), long.view(), &r, &KernelConfig::default()).unwrap()
    }

    #[test]
    fn balanced_views_need_no_padding() {
        let mut rng = crate::util::rng(6);
        let x = Array2::from_shape_fn((6, 3), |_| rng.random::<f64>());
        let y = Array2::from_shape_fn((6, 3), |_| rng.random::<f64>());
        let p = padded_for(&x, &y);
        assert_eq!(p.synthesized(), 0);
        let cost = build_cost_matrix(x.view(), y.view()).unwrap();
        let r = reorder_rows(&cost, &hungarian(cost.z.view()).unwrap()).unwrap();
        let direct = hungarian(r.z_r.t()).unwrap();
        assert_eq!(p.final_pairs, direct.pairs);
    }

    #[test]
    fn one_extra_row_synthesizes_one() {
        let mut rng = crate::util::rng(7);
        let long = Array2::from_shape_fn((7, 3), |_| rng.random::<f64>());
        let short = long.slice(ndarray::s![..6, ..]).to_owned();
        let p = padded_for(&short, &long);
        assert_eq!(p.synthesized(), 1);
        assert_eq!(p.padded_short.nrows(), 7);
        assert_eq!(p.expanded_cost.dim(), (7, 7));
        let mut seen: Vec<usize> = p.final_pairs.iter().map(|x| x.1).collect();
        seen.sort();
        assert_eq!(seen, (0..7).collect::<Vec<_>>());
        for (i, pair) in p.final_pairs.iter().enumerate() {
            assert_eq!(pair.0, i);
        }
    }

    #[test]
    fn fusion_shapes() {
        let long = array![[1.0, 2.0], [3.0, 4.0], [5.0, 7.0]];
        let p = padded_for(&long, &long);
        let f = fuse(&p, long.view(), &[0, 1, 1]).unwrap();
        assert_eq!(f.features.dim(), (3, 4));
        assert_eq!(f.labels, vec![0, 1, 1]);
        for i in 0..3 {
            assert_eq!(f.features.row(i).to_vec(), [long.row(i).to_vec(), long.row(i).to_vec()].concat());
        }
        assert!(fuse(&p, long.slice(ndarray::s![..2, ..]), &[0, 1]).is_err());
    }
}
