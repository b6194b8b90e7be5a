//! Exact k-nearest neighbors, neighborhood matrices and distance-rank tables.
//!
//! Distances are Euclidean. A point is never its own neighbor, and ties are
//! broken by the smaller point index so every result is reproducible.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, DataMatrix};

/// Per-point neighbor lists, nearest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodIndex {
    k: usize,
    n: usize,
    neighbors: Vec<usize>,
}

impl NeighborhoodIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Neighbors of point `i`, ascending by distance.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    /// The index restricted to the first `k` neighbors of every point.
    ///
    /// Because ordering and tie-breaking are total, this equals `knn_index(x, k)`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k {
            return Err(Error::Parameter(format!(
                "cannot truncate a {}-NN index to k = {k}",
                self.k
            )));
        }
        let neighbors = (0..self.n)
            .flat_map(|i| self.neighbors(i)[..k].iter().copied())
            .collect();
        Ok(Self { k, n: self.n, neighbors })
    }
}

/// All other points of `x` ordered by (distance to `i`, index).
fn sorted_others(x: &DataMatrix, i: usize) -> Vec<(f64, usize)> {
    let xi = x.row(i);
    let mut d: Vec<(f64, usize)> = (0..x.nrows())
        .filter(|&j| j != i)
        .map(|j| (squared_distance(xi, x.row(j)), j))
        .collect();
    d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d
}

/// Exact Euclidean k-NN by brute force.
pub fn knn_index(x: &DataMatrix, k: usize) -> Result<NeighborhoodIndex> {
    let n = x.nrows();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "k must satisfy 1 <= k <= n - 1 = {}, got {k}",
            n.saturating_sub(1)
        )));
    }
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(xi, x.row(j)), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < d.len() {
                d.select_nth_unstable_by(k - 1, cmp);
                d.truncate(k);
            }
            d.sort_unstable_by(cmp);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(NeighborhoodIndex {
        k,
        n,
        neighbors: rows.into_iter().flatten().collect(),
    })
}

/// The `d x k` matrix whose columns are the neighbors of point `i`, in neighbor order.
pub fn neighborhood_matrix(x: &DataMatrix, idx: &NeighborhoodIndex, i: usize) -> DMatrix<f64> {
    let nb = idx.neighbors(i);
    DMatrix::from_fn(x.ncols(), nb.len(), |r, c| x.get(nb[c], r))
}

/// Removes the mean column: `M - (1/k) M 1 1^T`.
pub fn center_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let k = m.ncols() as f64;
    for mut row in out.row_iter_mut() {
        let mean = row.sum() / k;
        row.add_scalar_mut(-mean);
    }
    out
}

/// Distance ranks: `rank(i, j)` is the 1-based position of `j` when the other
/// points are sorted by distance from `i`. The diagonal holds 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    ranks: Vec<u32>,
}

impl RankTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.ranks[i * self.n..(i + 1) * self.n]
    }
}

pub fn rank_table(x: &DataMatrix) -> Result<RankTable> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Input("rank table needs at least two points".into()));
    }
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u32; n];
            for (pos, (_, j)) in sorted_others(x, i).into_iter().enumerate() {
                row[j] = pos as u32 + 1;
            }
            row
        })
        .collect();
    Ok(RankTable {
        n,
        ranks: rows.into_iter().flatten().collect(),
    })
}
