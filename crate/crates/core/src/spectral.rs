//! Singular spectra, stable rank and spectral entropy.
//!
//! The entropy of a matrix is the Shannon entropy (natural log) of its squared
//! singular values normalized to a probability vector. Writing
//! `alpha_j = sigma_j^2 / sigma_1^2`, the stable rank is `r = sum_j alpha_j` and
//! the entropy splits as `H = ln r - eps` with `eps = (1/r) sum_j alpha_j ln alpha_j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::ensure_finite;

/// Relative cutoff below which a singular value is treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Singular values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Wraps a list of singular values, sorting it descending.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input("singular values must be finite and non-negative".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Values strictly above `RANK_TOLERANCE * sigma_1`.
    pub fn significant(&self) -> &[f64] {
        let cutoff = RANK_TOLERANCE * self.largest();
        let count = self.values.iter().take_while(|&&v| v > cutoff).count();
        &self.values[..count]
    }

    pub fn algebraic_rank(&self) -> usize {
        self.significant().len()
    }

    /// Same spectrum multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Entropy together with its stable-rank decomposition `H = ln r - eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDecomposition {
    pub stable_rank: f64,
    pub epsilon_term: f64,
    pub entropy: f64,
}

/// Singular values of `m`, descending; `min(rows, cols)` of them.
pub fn singular_values(m: &DMatrix<f64>) -> Result<SingularSpectrum> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Input("singular values of an empty matrix".into()));
    }
    ensure_finite(m, "matrix")?;
    let values = crate::linalg::singular_values(m)?;
    // guard against -0.0 for exact zeros
    SingularSpectrum::from_values(values.iter().map(|v| v.max(0.0)).collect())
}

/// Scale factors `alpha_j = (sigma_j / sigma_1)^2` over the significant values.
fn alphas(s: &SingularSpectrum) -> Result<Vec<f64>> {
    let sig = s.significant();
    let top = s.largest();
    if sig.is_empty() || top <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(sig.iter().map(|v| (v / top) * (v / top)).collect())
}

/// Stable rank `sum sigma_j^2 / sigma_1^2`.
pub fn stable_rank(s: &SingularSpectrum) -> Result<f64> {
    Ok(alphas(s)?.iter().sum())
}

/// Shannon entropy of the normalized squared spectrum, with its decomposition.
pub fn spectral_entropy(s: &SingularSpectrum) -> Result<EntropyDecomposition> {
    let alpha = alphas(s)?;
    let stable_rank: f64 = alpha.iter().sum();
    let epsilon_term = alpha
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| a * a.ln())
        .sum::<f64>()
        / stable_rank;

    // Entropy proper, evaluated directly from p_j = sigma_j^2 / sum sigma_m^2.
    let sig = s.significant();
    let total: f64 = sig.iter().map(|v| v * v).sum();
    let entropy = -sig
        .iter()
        .map(|v| v * v / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>();

    Ok(EntropyDecomposition {
        stable_rank,
        epsilon_term,
        entropy,
    })
}

/// Spectral entropy of a matrix.
pub fn matrix_entropy(m: &DMatrix<f64>) -> Result<EntropyDecomposition> {
    spectral_entropy(&singular_values(m)?)
}
