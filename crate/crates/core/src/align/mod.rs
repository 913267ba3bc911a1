//! Consistency-aware padding: cost matrix, Hungarian matching,
//! similarity-sorted reordering, Gaussian-kernel padding of the short view,
//! realignment and fusion.

mod hungarian;
mod padding;

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::util::unit_rows;
use crate::{Error, Result};

pub use hungarian::{hungarian, Assignment};
pub use padding::{
    default_sigma, fuse, fuse_pairs, gaussian_kernel, interpolate_point, pad_and_realign, select_gap_indices,
    Fused, Interpolated, KernelConfig, PaddedAlignment,
};

/// Which input supplies the rows of a [`CostMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// First input is the short (row) side; also used when sizes tie.
    FirstIsRows,
    SecondIsRows,
}

/// `Z = 1 - Z'` where `Z'` holds cosine similarities clipped to `[0, 1]`,
/// rows normalized to sum to 1. Rows belong to the smaller view.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub z: Array2<f64>,
    pub orientation: Orientation,
}

impl CostMatrix {
    pub fn n_short(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_long(&self) -> usize {
        self.z.ncols()
    }
}

/// Cost rows of `rows` against `cols` (unit-normalized inputs).
pub(crate) fn cost_rows(rows: ArrayView2<f64>, cols: ArrayView2<f64>) -> Array2<f64> {
    let mut z = rows.dot(&cols.t());
    let width = z.ncols() as f64;
    for mut row in z.rows_mut() {
        row.mapv_inplace(|c| c.clamp(0.0, 1.0));
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|c| 1.0 - c / s);
        } else {
            row.fill(1.0 - 1.0 / width);
        }
    }
    z
}

pub fn build_cost_matrix(latent1: ArrayView2<f64>, latent2: ArrayView2<f64>) -> Result<CostMatrix> {
    if latent1.ncols() != latent2.ncols() {
        return Err(Error::shape(format!(
            "latent widths differ: {} vs {}",
            latent1.ncols(),
            latent2.ncols()
        )));
    }
    let u1 = unit_rows(latent1).ok_or_else(|| Error::degenerate("zero latent row in view 1"))?;
    let u2 = unit_rows(latent2).ok_or_else(|| Error::degenerate("zero latent row in view 2"))?;
    let (z, orientation) = if latent1.nrows() <= latent2.nrows() {
        (cost_rows(u1.view(), u2.view()), Orientation::FirstIsRows)
    } else {
        (cost_rows(u2.view(), u1.view()), Orientation::SecondIsRows)
    };
    Ok(CostMatrix { z, orientation })
}

/// `Z^r = U^r Z`: rows sorted by their assigned pair distance, ascending,
/// ties by original row.
#[derive(Debug, Clone, PartialEq)]
pub struct Reordered {
    pub z_r: Array2<f64>,
    /// `order[r]` is the original row placed at position `r`.
    pub order: Vec<usize>,
    /// Assigned distance of each sorted row (ascending).
    pub distances: Vec<f64>,
    /// Assigned column of each sorted row.
    pub assigned_cols: Vec<usize>,
}

impl Reordered {
    /// The permutation indicator `U^r`.
    pub fn indicator(&self) -> Array2<f64> {
        let n = self.order.len();
        let mut u = Array2::zeros((n, n));
        for (r, &o) in self.order.iter().enumerate() {
            u[[r, o]] = 1.0;
        }
        u
    }

    /// Undo the reordering.
    pub fn restore(&self) -> Array2<f64> {
        self.indicator().t().dot(&self.z_r)
    }
}

pub fn reorder_rows(cost: &CostMatrix, assignment: &Assignment) -> Result<Reordered> {
    let n = cost.n_short();
    let cols = assignment.col_of_rows(n);
    let mut keyed = Vec::with_capacity(n);
    for (r, c) in cols.iter().enumerate() {
        let c = c.ok_or_else(|| Error::invalid(format!("row {r} has no assigned column")))?;
        keyed.push((cost.z[[r, c]], r, c));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = keyed.iter().map(|k| k.1).collect();
    Ok(Reordered {
        z_r: cost.z.select(ndarray::Axis(0), &order),
        order,
        distances: keyed.iter().map(|k| k.0).collect(),
        assigned_cols: keyed.iter().map(|k| k.2).collect(),
    })
}
