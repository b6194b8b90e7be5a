//! Small dense linear-algebra helpers shared by the reducers and metrics.

use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin singular value decomposition `m = U diag(s) V^T`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `rows x r` with orthonormal columns, `r = min(rows, cols)`.
    pub u: DMatrix<f64>,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `cols x r` with orthonormal columns.
    pub v: DMatrix<f64>,
}

pub fn thin_svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    Ok(ThinSvd {
        u: from_faer(svd.U()),
        singular_values: svd.S().column_vector().iter().copied().collect(),
        v: from_faer(svd.V()),
    })
}

/// Singular values of `m` in non-increasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))
}

/// Eigendecomposition of a symmetric matrix with eigenvalues in ascending order.
///
/// Column `j` of the returned matrix is the unit eigenvector of eigenvalue `j`,
/// with its sign fixed by [`fix_sign`].
pub fn symmetric_eigen_ascending(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(Error::Numerical("eigensolve of a non-square matrix".into()));
    }
    let n = m.nrows();
    let eig = to_faer(&m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver did not converge: {e:?}")))?;
    let raw: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&j| raw[j]).collect();
    let u = eig.U();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = DVector::from_fn(n, |i, _| u[(i, src)]);
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Subtracts the column means from every row (points-as-rows centering).
pub fn center_rows_as_points(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let n = m.nrows() as f64;
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Applies the double-centering `J K J` with `J = I - 11^T/n`.
pub fn double_center(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| k.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - col_means[j] + grand)
}
