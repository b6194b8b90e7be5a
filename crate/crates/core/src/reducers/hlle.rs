//! Hessian eigenmaps.
//!
//! For each neighborhood the tangent coordinates come from the top `d` left
//! singular vectors of the centered neighbor matrix. Orthonormalizing
//! `[1, tangent, pairwise products]` and keeping the last `d(d+1)/2` columns gives
//! a local Hessian estimator `H_i`; the alignment matrix `sum_i H_i H_i^T` has the
//! constant and the `d` isometric coordinate functions in its null space.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::matrix::DataMatrix;
use crate::neighborhoods::knn_index;

use super::null_space_embedding;

/// Eigenvalues below this fraction of the largest count as null.
pub const HESSIAN_NULL_TOLERANCE: f64 = 1e-8;

/// Smallest usable neighborhood: `d + d(d+1)/2 + 1`.
pub fn min_neighbors(d: usize) -> usize {
    d + d * (d + 1) / 2 + 1
}

#[derive(Debug, Clone)]
pub struct HlleFit {
    pub embedding: DataMatrix,
    /// The `d + 1` smallest eigenvalues of the alignment matrix.
    pub null_eigenvalues: Vec<f64>,
    /// Largest diagonal entry of the alignment matrix, an upper scale for its spectrum.
    pub scale: f64,
}

pub fn hlle(x: &DataMatrix, d: usize, k: usize) -> Result<DataMatrix> {
    Ok(hlle_fit(x, d, k)?.embedding)
}

/// Local Hessian estimator for one neighborhood, `k x d(d+1)/2`.
fn hessian_estimator(x: &DataMatrix, nb: &[usize], d: usize) -> Result<DMatrix<f64>> {
    let k = nb.len();
    let ambient = x.ncols();
    let mut g = DMatrix::from_fn(k, ambient, |a, c| x.get(nb[a], c));
    for mut col in g.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let u = thin_svd(&g)?.u;
    if u.ncols() < d {
        return Err(Error::Numerical("neighborhood has fewer tangent directions than d".into()));
    }

    let dp = d * (d + 1) / 2;
    let mut basis = DMatrix::zeros(k, 1 + d + dp);
    basis.column_mut(0).fill(1.0);
    for j in 0..d {
        basis.set_column(1 + j, &u.column(j));
    }
    let mut col = 1 + d;
    for a in 0..d {
        for b in a..d {
            let prod = basis.column(1 + a).component_mul(&basis.column(1 + b));
            basis.set_column(col, &prod);
            col += 1;
        }
    }
    let q = basis.qr().q();
    Ok(q.columns(1 + d, dp).into_owned())
}

pub fn hlle_fit(x: &DataMatrix, d: usize, k: usize) -> Result<HlleFit> {
    let min_k = min_neighbors(d);
    if d == 0 || k < min_k {
        return Err(Error::Parameter(format!(
            "HLLE with d = {d} needs k >= d + d(d+1)/2 + 1 = {min_k}, got k = {k}"
        )));
    }
    let n = x.nrows();
    let idx = knn_index(x, k)?;
    let blocks: Vec<DMatrix<f64>> = (0..n)
        .into_par_iter()
        .map(|i| hessian_estimator(x, idx.neighbors(i), d))
        .collect::<Result<_>>()?;

    let mut m = DMatrix::zeros(n, n);
    for (i, h) in blocks.iter().enumerate() {
        let nb = idx.neighbors(i);
        let local = h * h.transpose();
        for (a, &p) in nb.iter().enumerate() {
            for (b, &q) in nb.iter().enumerate() {
                m[(p, q)] += local[(a, b)];
            }
        }
    }
    let scale = (0..n).map(|i| m[(i, i)]).fold(0.0, f64::max);
    let (embedding, null_eigenvalues) = null_space_embedding(m, d)?;
    if null_eigenvalues.iter().filter(|&&v| v <= HESSIAN_NULL_TOLERANCE * scale).count() > d + 1 {
        log::warn!("HLLE: null space is larger than d + 1; the neighborhood graph may be disconnected");
    }
    Ok(HlleFit {
        embedding,
        null_eigenvalues,
        scale,
    })
}
