use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::align::hungarian;
use crate::{Error, Result};

/// Pred-by-truth counts; rows in canonical order, columns by sorted truth id.
struct Contingency {
    table: Array2<f64>,
    n: usize,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let ids: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let mapped = labels.iter().map(|l| ids[l]).collect();
    (mapped, ids.len())
}

fn contingency(pred: &[usize], truth: &[usize]) -> Result<Contingency> {
    if pred.len() != truth.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("cannot score an empty labelling"));
    }
    let (p, n_pred) = compact(pred);
    let (t, n_truth) = compact(truth);
    let mut table = Array2::<f64>::zeros((n_pred, n_truth));
    for (a, b) in p.iter().zip(&t) {
        table[[*a, *b]] += 1.0;
    }
    // Order predicted clusters by their count rows rather than their ids so
    // every relabelling of `pred` yields the same table (and tie-breaks).
    let mut order: Vec<usize> = (0..n_pred).collect();
    order.sort_by(|&x, &y| {
        table
            .row(y)
            .iter()
            .zip(table.row(x).iter())
            .map(|(b, a)| b.total_cmp(a))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let table = table.select(ndarray::Axis(0), &order);
    Ok(Contingency {
        table,
        n: pred.len(),
    })
}

/// Best one-to-one map from predicted cluster (row of the table) to true
/// class (column), maximizing agreements.
fn best_matching(c: &Contingency) -> Result<Vec<Option<usize>>> {
    let assignment = hungarian(c.table.mapv(|v| -v).view())?;
    Ok(assignment.col_of_rows(c.table.nrows()))
}

fn matched_agreements(c: &Contingency, matching: &[Option<usize>]) -> f64 {
    matching
        .iter()
        .enumerate()
        .filter_map(|(r, m)| m.map(|col| c.table[[r, col]]))
        .sum()
}

/// Fraction of samples agreeing with the truth under the best relabelling.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let m = best_matching(&c)?;
    Ok(matched_agreements(&c, &m) / c.n as f64)
}

fn entropy(counts: impl Iterator<Item = f64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0.0)
        .map(|c| {
            let p = c / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let n = c.n as f64;
    let rows = c.table.sum_axis(ndarray::Axis(1));
    let cols = c.table.sum_axis(ndarray::Axis(0));
    let hp = entropy(rows.iter().copied(), n);
    let ht = entropy(cols.iter().copied(), n);
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    if is_bijection(&c.table) {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for ((i, j), &nij) in c.table.indexed_iter() {
        if nij > 0.0 {
            mi += nij / n * (n * nij / (rows[i] * cols[j])).ln();
        }
    }
    Ok((mi / ((hp + ht) / 2.0)).clamp(0.0, 1.0))
}

/// Every row and every column of the table has exactly one non-zero cell.
fn is_bijection(table: &Array2<f64>) -> bool {
    table.nrows() == table.ncols()
        && table.rows().into_iter().all(|r| r.iter().filter(|&&v| v > 0.0).count() == 1)
        && table.columns().into_iter().all(|c| c.iter().filter(|&&v| v > 0.0).count() == 1)
}

fn comb2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index (pair counting with expected-index correction).
pub fn ari(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let index: f64 = c.table.iter().map(|&v| comb2(v)).sum();
    let a: f64 = c.table.sum_axis(ndarray::Axis(1)).iter().map(|&v| comb2(v)).sum();
    let b: f64 = c.table.sum_axis(ndarray::Axis(0)).iter().map(|&v| comb2(v)).sum();
    let total = comb2(c.n as f64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = a * b / total;
    let max = (a + b) / 2.0;
    if max == expected {
        // both partitions trivial (all singletons or one block)
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn weighted_f1(c: &Contingency, matching: &[Option<usize>]) -> f64 {
    let n = c.n as f64;
    let supports = c.table.sum_axis(ndarray::Axis(0));
    let predicted = c.table.sum_axis(ndarray::Axis(1));
    let mut score = 0.0;
    for (r, m) in matching.iter().enumerate() {
        let Some(class) = *m else { continue };
        let tp = c.table[[r, class]];
        if tp == 0.0 {
            continue;
        }
        let precision = tp / predicted[r];
        let recall = tp / supports[class];
        score += supports[class] * 2.0 * precision * recall / (precision + recall);
    }
    score / n
}

/// Support-weighted one-vs-rest F1 after the same relabelling as
/// [`accuracy`].
pub fn f1_weighted(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let m = best_matching(&c)?;
    Ok(weighted_f1(&c, &m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub acc: f64,
    pub nmi: f64,
    pub ari: f64,
    pub f1_weighted: f64,
    pub seed: u64,
    pub k: usize,
}

/// All four metrics; ACC and F1 share one matching.
pub fn evaluate(pred: &[usize], truth: &[usize], seed: u64, k: usize) -> Result<ClusteringReport> {
    let c = contingency(pred, truth)?;
    let m = best_matching(&c)?;
    Ok(ClusteringReport {
        acc: matched_agreements(&c, &m) / c.n as f64,
        nmi: nmi(pred, truth)?,
        ari: ari(pred, truth)?,
        f1_weighted: weighted_f1(&c, &m),
        seed,
        k,
    })
}
