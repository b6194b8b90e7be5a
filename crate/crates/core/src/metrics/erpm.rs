//! Entropy rank preservation: change in spectral entropy between a centered
//! neighborhood and its image under the embedding.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::matrix_entropy;

/// `H(Yc) - H(Xc)` for centered neighborhood matrices sharing the same `k` columns.
///
/// Negative values mean the embedded neighborhood concentrates its variance in
/// fewer directions. Returns [`Error::DegenerateSpectrum`] if either matrix is zero.
pub fn erpm_local(xc: &DMatrix<f64>, yc: &DMatrix<f64>) -> Result<f64> {
    if xc.ncols() != yc.ncols() {
        return Err(Error::Input(format!(
            "neighborhoods have {} and {} columns",
            xc.ncols(),
            yc.ncols()
        )));
    }
    let hx = matrix_entropy(xc)?;
    let hy = matrix_entropy(yc)?;
    Ok(hy.entropy - hx.entropy)
}

/// Mean of the non-degenerate local values (`None` marks a degenerate neighborhood).
///
/// Returns the mean and the number of excluded entries. Summation runs in index order.
pub fn erpm_global(locals: &[Option<f64>]) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for v in locals.iter().flatten() {
        sum += v;
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllDegenerate { count: locals.len() });
    }
    Ok((sum / used as f64, locals.len() - used))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighborhoods::center_columns;

    fn entropy_of(p: &[f64]) -> f64 {
        -p.iter().map(|v| v * v.ln()).sum::<f64>()
    }

    #[test]
    fn identity_is_zero() {
        let x = center_columns(&DMatrix::from_fn(3, 6, |r, c| ((r + 2 * c) % 5) as f64 + 0.1 * r as f64));
        assert_eq!(erpm_local(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_spectra() {
        // Xc spectrum (2,1,1), Yc spectrum (2,1).
        let mut xc = DMatrix::zeros(3, 4);
        xc[(0, 0)] = 2.0;
        xc[(1, 1)] = 1.0;
        xc[(2, 2)] = 1.0;
        let mut yc = DMatrix::zeros(2, 4);
        yc[(0, 0)] = 2.0;
        yc[(1, 1)] = 1.0;
        let expected = entropy_of(&[0.8, 0.2]) - entropy_of(&[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]);
        assert!((erpm_local(&xc, &yc).unwrap() - expected).abs() < 1e-14);
        assert!(expected < 0.0);
        assert!((erpm_local(&yc, &xc).unwrap() + expected).abs() < 1e-14);
    }

    #[test]
    fn degenerate_and_global() {
        let z = DMatrix::zeros(2, 3);
        let x = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
        assert!(matches!(erpm_local(&z, &x), Err(Error::DegenerateSpectrum)));
        assert!(matches!(erpm_local(&x, &z), Err(Error::DegenerateSpectrum)));

        assert_eq!(erpm_global(&[Some(0.0), Some(0.0)]).unwrap(), (0.0, 0));
        let (m, skipped) = erpm_global(&[Some(-0.2), None, Some(-0.4)]).unwrap();
        assert!((m + 0.3).abs() < 1e-15);
        assert_eq!(skipped, 1);
        assert!(matches!(erpm_global(&[None, None]), Err(Error::AllDegenerate { count: 2 })));
    }
}
