use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{center_rows_as_points, symmetric_eigen_ascending};
use crate::matrix::DataMatrix;

/// Principal components and the projected data.
#[derive(Debug, Clone)]
pub struct PcaFit {
    pub embedding: DataMatrix,
    /// Covariance eigenvalues (divided by `n - 1`), descending, one per output column.
    pub variances: Vec<f64>,
    /// Principal directions as columns, `D x d`.
    pub components: DMatrix<f64>,
}

/// Projection onto the top `d` principal directions of the column-centered data.
pub fn pca(x: &DataMatrix, d: usize) -> Result<DataMatrix> {
    Ok(pca_fit(x, d)?.embedding)
}

pub fn pca_fit(x: &DataMatrix, d: usize) -> Result<PcaFit> {
    let ambient = x.ncols();
    if d == 0 || d > ambient {
        return Err(Error::Parameter(format!(
            "PCA dimension must be in [1, {ambient}], got {d}"
        )));
    }
    let centered = center_rows_as_points(&x.to_dmatrix());
    let denom = (x.nrows().max(2) - 1) as f64;
    let cov = centered.transpose() * &centered / denom;
    let (values, vectors) = symmetric_eigen_ascending(cov)?;
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let mut components = DMatrix::zeros(ambient, d);
    let mut variances = Vec::with_capacity(d);
    for j in 0..d {
        let src = ambient - 1 - j;
        components.set_column(j, &vectors.column(src));
        variances.push(values[src].max(0.0));
    }
    if variances.iter().any(|&v| v <= 1e-12 * top) {
        log::warn!("PCA: requested {d} components but the data has lower rank; trailing coordinates carry no variance");
    }
    let embedding = DataMatrix::from_dmatrix(&(centered * &components))?;
    Ok(PcaFit {
        embedding,
        variances,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::singular_values;

    #[test]
    fn recovers_planar_data_exactly() {
        // points on the plane z = 2x - y + 1
        let rows: Vec<[f64; 3]> = (0..30)
            .map(|i| {
                let a = (i as f64 * 0.37).sin() * 3.0;
                let b = (i as f64 * 0.91).cos() * 2.0;
                [a, b, 2.0 * a - b + 1.0]
            })
            .collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let fit = pca_fit(&x, 2).unwrap();
        let centered = center_rows_as_points(&x.to_dmatrix());
        let recon = fit.embedding.to_dmatrix() * fit.components.transpose();
        assert!((recon - centered).norm() < 1e-10);
    }

    #[test]
    fn full_dimension_is_a_rotation() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [2.0, 2.5]]).unwrap();
        let y = pca(&x, 2).unwrap();
        let sx = singular_values(&center_rows_as_points(&x.to_dmatrix())).unwrap();
        let sy = singular_values(&y.to_dmatrix()).unwrap();
        for (a, b) in sx.values().iter().zip(sy.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(pca(&x, 3).is_err());
    }
}
