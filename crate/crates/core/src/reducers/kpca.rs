use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{double_center, symmetric_eigen_ascending};
use crate::matrix::DataMatrix;

/// Kernel PCA output.
#[derive(Debug, Clone)]
pub struct KpcaFit {
    pub embedding: DataMatrix,
    /// Top eigenvalues of the centered kernel, descending (non-positive ones included as reported).
    pub eigenvalues: Vec<f64>,
}

/// `(x^T y + 1)^2`.
pub fn quadratic_kernel(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    (dot + 1.0) * (dot + 1.0)
}

/// Kernel PCA with the quadratic kernel.
pub fn kpca(x: &DataMatrix, d: usize) -> Result<DataMatrix> {
    Ok(kpca_fit(x, d)?.embedding)
}

/// Solves `K_c alpha = lambda alpha` on the double-centered kernel matrix.
///
/// Coefficients are normalized as `alpha = v / sqrt(lambda)`, so the projection of
/// the training points `K_c alpha` equals `sqrt(lambda) v`.
pub fn kpca_fit(x: &DataMatrix, d: usize) -> Result<KpcaFit> {
    let n = x.nrows();
    if d == 0 || d > n {
        return Err(Error::Parameter(format!("KPCA dimension must be in [1, {n}], got {d}")));
    }
    let kernel = DMatrix::from_fn(n, n, |i, j| quadratic_kernel(x.row(i), x.row(j)));
    let centered = double_center(&kernel);
    let (values, vectors) = symmetric_eigen_ascending(centered)?;
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let mut out = DMatrix::zeros(n, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for j in 0..d {
        let src = n - 1 - j;
        let lambda = values[src];
        eigenvalues.push(lambda);
        if lambda > 1e-12 * top && lambda > 0.0 {
            out.set_column(j, &(vectors.column(src) * lambda.sqrt()));
        } else {
            log::warn!("KPCA: eigenvalue {j} is not positive ({lambda:e}); coordinate left at zero");
        }
    }
    Ok(KpcaFit {
        embedding: DataMatrix::from_dmatrix(&out)?,
        eigenvalues,
    })
}
