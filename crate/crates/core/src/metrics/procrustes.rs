//! Local conformal Procrustes residual.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::thin_svd;

/// Normalized conformal Procrustes residual of one neighborhood.
///
/// Inputs are centered `d x k` and `l x k` matrices (points as columns). With
/// `P = Xc^T`, `Q = Yc^T` zero-padded to a common width, the SVD
/// `P^T Q = U S V^T` gives the rotation `A = U V^T` and the scale
/// `c = tr(S) / tr(Q^T Q)`; the result is `||P - c Q A^T||_F^2 / ||P||_F^2`.
///
/// Returns [`Error::DegenerateSpectrum`] when `Xc` is zero and `1.0` when only `Yc` is zero.
pub fn procrustes_local(xc: &DMatrix<f64>, yc: &DMatrix<f64>) -> Result<f64> {
    let k = xc.ncols();
    if yc.ncols() != k {
        return Err(Error::Input(format!(
            "neighborhoods have {} and {} columns",
            k,
            yc.ncols()
        )));
    }
    let width = xc.nrows().max(yc.nrows());
    let p = padded_transpose(xc, width);
    let q = padded_transpose(yc, width);

    let x_norm2 = p.norm_squared();
    if x_norm2 == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    if k < 2 {
        return Err(Error::Parameter("procrustes needs at least two neighbors".into()));
    }
    let y_norm2 = q.norm_squared();
    if y_norm2 == 0.0 {
        return Ok(1.0);
    }

    let svd = thin_svd(&(p.transpose() * &q))?;
    let rotation = svd.u * svd.v.transpose();
    let scale = svd.singular_values.iter().sum::<f64>() / y_norm2;
    let residual = p - q * rotation.transpose() * scale;
    Ok(residual.norm_squared() / x_norm2)
}

/// `m^T` with zero columns appended up to `width`.
fn padded_transpose(m: &DMatrix<f64>, width: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.ncols(), width);
    out.view_mut((0, 0), (m.ncols(), m.nrows())).copy_from(&m.transpose());
    out
}
