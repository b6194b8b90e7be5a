use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::neighborhoods::{knn_index, NeighborhoodIndex};

use super::null_space_embedding;

/// Default local Gram regularization, relative to `trace(G) / k`.
pub const DEFAULT_REGULARIZATION: f64 = 1e-3;

/// LLE output.
#[derive(Debug, Clone)]
pub struct LleFit {
    pub embedding: DataMatrix,
    /// Reconstruction weights; row `i` is supported on the neighbors of `i` and sums to 1.
    pub weights: DMatrix<f64>,
    /// The `d + 1` smallest eigenvalues of `(I - W)^T (I - W)`.
    pub eigenvalues: Vec<f64>,
}

pub fn lle(x: &DataMatrix, d: usize, k: usize) -> Result<DataMatrix> {
    Ok(lle_fit(x, d, k, DEFAULT_REGULARIZATION)?.embedding)
}

/// Solves `G w = 1` for one neighborhood and normalizes `w` to sum 1.
fn local_weights(x: &DataMatrix, i: usize, nb: &[usize], reg: f64) -> Result<DVector<f64>> {
    let k = nb.len();
    let xi = x.row(i);
    let z = DMatrix::from_fn(k, x.ncols(), |a, c| x.get(nb[a], c) - xi[c]);
    let gram = &z * z.transpose();
    let trace = gram.trace();
    // With more neighbors than ambient dimensions the Gram matrix is singular.
    let mut shift = if k > x.ncols() { reg * trace / k as f64 } else { 0.0 };
    let ones = DVector::from_element(k, 1.0);
    for _ in 0..2 {
        let mut g = gram.clone();
        for a in 0..k {
            g[(a, a)] += shift;
        }
        if let Some(chol) = g.cholesky() {
            let w = chol.solve(&ones);
            let s = w.sum();
            if s.is_finite() && s.abs() > f64::MIN_POSITIVE {
                return Ok(w / s);
            }
        }
        shift = if trace > 0.0 { reg.max(1e-12) * trace / k as f64 } else { reg.max(1e-12) };
    }
    Err(Error::Numerical(format!("local Gram system of point {i} is singular")))
}

/// Reconstruction weights for every point, as a dense `n x n` matrix.
pub fn lle_weights(x: &DataMatrix, idx: &NeighborhoodIndex, reg: f64) -> Result<DMatrix<f64>> {
    use rayon::prelude::*;
    let n = x.nrows();
    let rows: Vec<DVector<f64>> = (0..n)
        .into_par_iter()
        .map(|i| local_weights(x, i, idx.neighbors(i), reg))
        .collect::<Result<_>>()?;
    let mut w = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (a, &j) in idx.neighbors(i).iter().enumerate() {
            w[(i, j)] = row[a];
        }
    }
    Ok(w)
}

/// `(I - W)^T (I - W)` for a weight matrix supported on the neighbor lists.
pub(crate) fn alignment_from_weights<'a>(
    w: &DMatrix<f64>,
    neighbors: impl Fn(usize) -> &'a [usize],
) -> DMatrix<f64> {
    let n = w.nrows();
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        let nb = neighbors(i);
        for &j in nb {
            let wij = w[(i, j)];
            m[(i, j)] -= wij;
            m[(j, i)] -= wij;
        }
        for &a in nb {
            for &b in nb {
                m[(a, b)] += w[(i, a)] * w[(i, b)];
            }
        }
    }
    m
}

pub fn lle_fit(x: &DataMatrix, d: usize, k: usize, reg: f64) -> Result<LleFit> {
    if d == 0 || k < d + 1 {
        return Err(Error::Parameter(format!("LLE needs k >= d + 1, got k = {k}, d = {d}")));
    }
    let idx = knn_index(x, k)?;
    let weights = lle_weights(x, &idx, reg)?;
    let m = alignment_from_weights(&weights, |i| idx.neighbors(i));
    let (embedding, eigenvalues) = null_space_embedding(m, d)?;
    Ok(LleFit {
        embedding,
        weights,
        eigenvalues,
    })
}
