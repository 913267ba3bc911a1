use crate::data::ModalityMatrix;
use crate::util::sq_dist;
use crate::{Error, Result};

use super::VisitScores;

/// Anchors grouped by the sweep that selected them.
pub fn greedy_sweeps(
    x: &ModalityMatrix,
    scores: &VisitScores,
    radius: f64,
    n_anchors: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = x.n_rows();
    if scores.0.len() != n {
        return Err(Error::shape(format!("{} scores for {n} rows", scores.0.len())));
    }
    if n_anchors == 0 || n_anchors > n {
        return Err(Error::invalid(format!("anchor count must be in 1..={n}, got {n_anchors}")));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius must be > 0, got {radius}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores.0[b].total_cmp(&scores.0[a]).then(a.cmp(&b)));

    let values = x.values();
    let r2 = radius * radius;
    let mut selected = vec![false; n];
    let mut total = 0;
    let mut sweeps = Vec::new();
    while total < n_anchors {
        let mut marked = vec![false; n];
        let mut sweep = Vec::new();
        for &i in &order {
            if selected[i] || marked[i] {
                continue;
            }
            selected[i] = true;
            sweep.push(i);
            total += 1;
            if total == n_anchors {
                break;
            }
            let xi = values.row(i);
            for (j, m) in marked.iter_mut().enumerate() {
                if !*m && sq_dist(xi, values.row(j)) <= r2 {
                    *m = true;
                }
            }
        }
        sweeps.push(sweep);
    }
    Ok(sweeps)
}

/// Highest-scoring unmarked node first; each pick marks everything within
/// `radius`. Marks reset once every node is marked, until `n_anchors`
/// distinct indices are chosen.
pub fn greedy_expand(
    x: &ModalityMatrix,
    scores: &VisitScores,
    radius: f64,
    n_anchors: usize,
) -> Result<Vec<usize>> {
    Ok(greedy_sweeps(x, scores, radius, n_anchors)?
        .into_iter()
        .flatten()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    #[test]
    fn line_trace() {
        let x = ModalityMatrix::new(array![[0.0], [1.0], [10.0]]).unwrap();
        let s = VisitScores(vec![3.0, 2.0, 1.0]);
        assert_eq!(greedy_expand(&x, &s, 2.0, 2).unwrap(), vec![0, 2]);
    }

    #[test]
    fn exhaustion_returns_everything() {
        let x = ModalityMatrix::new(array![[0.0], [0.5], [1.0], [10.0]]).unwrap();
        let s = VisitScores(vec![1.0; 4]);
        let mut got = greedy_expand(&x, &s, 100.0, 4).unwrap();
        got.sort();
        assert_eq!(got, vec![0, 1, 2, 3]);
    }

    #[test]
    fn too_many_anchors() {
        let x = ModalityMatrix::new(array![[0.0], [1.0]]).unwrap();
        assert!(greedy_expand(&x, &VisitScores(vec![1.0, 1.0]), 1.0, 3).is_err());
    }

    proptest! {
        #[test]
        fn sweeps_are_separated(seed in 0u64..500, n in 2usize..40, frac in 0.05f64..1.0, radius in 0.05f64..2.0) {
            use rand::Rng;
            let mut rng = crate::util::rng(seed);
            let x = Array2::from_shape_fn((n, 3), |_| rng.random::<f64>() * 3.0);
            let s = VisitScores((0..n).map(|_| rng.random()).collect());
            let x = ModalityMatrix::new(x).unwrap();
            let want = ((n as f64 * frac).ceil() as usize).clamp(1, n);
            let sweeps = greedy_sweeps(&x, &s, radius, want).unwrap();
            let all: Vec<usize> = sweeps.iter().flatten().copied().collect();
            prop_assert_eq!(all.len(), want);
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            prop_assert_eq!(dedup.len(), want);
            for sweep in &sweeps {
                for (a, &i) in sweep.iter().enumerate() {
                    for &j in &sweep[a + 1..] {
                        prop_assert!(sq_dist(x.values().row(i), x.values().row(j)).sqrt() > radius);
                    }
                }
            }
        }
    }
}
