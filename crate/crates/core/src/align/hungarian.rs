//! Minimum-cost assignment (Kuhn-Munkres with potentials, `O(n^3)`),
//! followed by a pass that picks the lexicographically smallest optimum.

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl Assignment {
    /// Column assigned to each row, `None` for unassigned rows.
    pub fn col_of_rows(&self, rows: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; rows];
        for &(r, c) in &self.pairs {
            out[r] = Some(c);
        }
        out
    }
}

struct SquareSolution {
    col_of: Vec<usize>,
    row_of: Vec<usize>,
    u: Vec<f64>,
    v: Vec<f64>,
}

fn solve_square(c: &Array2<f64>) -> SquareSolution {
    let n = c.nrows();
    // 1-based with a sentinel column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    let mut row_of = vec![0; n];
    for j in 1..=n {
        col_of[p[j] - 1] = j - 1;
        row_of[j - 1] = p[j] - 1;
    }
    SquareSolution {
        col_of,
        row_of,
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
    }
}

struct Refiner<'a> {
    c: &'a Array2<f64>,
    sol: SquareSolution,
    tol: f64,
}

impl Refiner<'_> {
    fn tight(&self, i: usize, j: usize) -> bool {
        self.c[[i, j]] - self.sol.u[i] - self.sol.v[j] <= self.tol
    }

    /// Re-seats `row` on a tight column other than `banned`, moving later
    /// rows along an alternating path, so that column `target` ends up used.
    fn reseat(&mut self, row: usize, fixed_below: usize, target: usize, banned: usize, seen: &mut [bool]) -> bool {
        let n = self.c.ncols();
        for j in 0..n {
            if seen[j] || j == banned || !self.tight(row, j) {
                continue;
            }
            seen[j] = true;
            if j == target {
                self.sol.col_of[row] = j;
                self.sol.row_of[j] = row;
                return true;
            }
            let owner = self.sol.row_of[j];
            if owner > fixed_below && self.reseat(owner, fixed_below, target, banned, seen) {
                self.sol.col_of[row] = j;
                self.sol.row_of[j] = row;
                return true;
            }
        }
        false
    }

    // Among optimal assignments (perfect matchings on tight edges), take the
    // smallest column for row 0, then row 1, and so on.
    fn lexicographic(&mut self, real_rows: usize) {
        let n = self.c.ncols();
        for i in 0..real_rows {
            let current = self.sol.col_of[i];
            for cand in 0..current {
                if !self.tight(i, cand) {
                    continue;
                }
                let owner = self.sol.row_of[cand];
                if owner < i {
                    continue;
                }
                let mut seen = vec![false; n];
                seen[cand] = true;
                if self.reseat(owner, i, current, cand, &mut seen) {
                    self.sol.col_of[i] = cand;
                    self.sol.row_of[cand] = i;
                    break;
                }
            }
        }
    }
}

fn solve_wide(cost: ArrayView2<f64>) -> Vec<(usize, usize)> {
    let (rows, cols) = cost.dim();
    let mut square = Array2::zeros((cols, cols));
    square.slice_mut(ndarray::s![..rows, ..]).assign(&cost);
    let scale = cost.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let sol = solve_square(&square);
    let mut refiner = Refiner {
        c: &square,
        sol,
        tol: 1e-10 * scale,
    };
    refiner.lexicographic(rows);
    (0..rows).map(|i| (i, refiner.sol.col_of[i])).collect()
}

/// Minimum-total-cost one-to-one assignment of `min(rows, cols)` pairs.
/// When there are fewer rows than columns every row is matched. Ties go to
/// the lexicographically smallest pair list.
pub fn hungarian(cost: ArrayView2<f64>) -> Result<Assignment> {
    if let Some(((r, c), v)) = cost.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("cost ({r}, {c}) = {v}")));
    }
    let (rows, cols) = cost.dim();
    if rows == 0 || cols == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
        });
    }
    let mut pairs = if rows <= cols {
        solve_wide(cost)
    } else {
        let mut p: Vec<(usize, usize)> = solve_wide(cost.t()).into_iter().map(|(c, r)| (r, c)).collect();
        p.sort_unstable();
        p
    };
    pairs.sort_unstable();
    let total_cost = pairs.iter().map(|&(r, c)| cost[[r, c]]).sum();
    Ok(Assignment { pairs, total_cost })
}
