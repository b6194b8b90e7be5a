//! Dimensionality reducers.
//!
//! Every reducer maps an `n x D` data matrix to an `n x d` embedding and is
//! deterministic: eigenvector signs are fixed so that the largest-magnitude
//! entry is positive, and neighbor ties are broken by index.

mod hlle;
mod info_lle;
mod isomap;
mod kpca;
mod lle;
mod pca;

pub use hlle::{hlle, hlle_fit, HlleFit, HESSIAN_NULL_TOLERANCE};
pub use info_lle::{info_lle, kde_distribution, symmetric_kl, PROBABILITY_FLOOR};
pub use isomap::{classical_mds, geodesic_distances, isomap, neighborhood_graph, shortest_paths};
pub use kpca::{kpca, kpca_fit, quadratic_kernel, KpcaFit};
pub use lle::{lle, lle_fit, lle_weights, LleFit, DEFAULT_REGULARIZATION};
pub use pca::{pca, pca_fit, PcaFit};

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fix_sign, symmetric_eigen_ascending};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pca,
    Kpca2,
    Lle,
    Hlle,
    Isomap,
    InfoLle,
    /// Returns the data unchanged; a baseline for metric sanity checks.
    Identity,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Pca,
        Method::Kpca2,
        Method::Lle,
        Method::Hlle,
        Method::Isomap,
        Method::InfoLle,
        Method::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Kpca2 => "kpca2",
            Method::Lle => "lle",
            Method::Hlle => "hlle",
            Method::Isomap => "isomap",
            Method::InfoLle => "info-lle",
            Method::Identity => "identity",
        }
    }

    /// Whether the method builds a neighborhood graph.
    pub fn uses_neighbors(self) -> bool {
        matches!(self, Method::Lle | Method::Hlle | Method::Isomap | Method::InfoLle)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Parameter(format!("unknown method '{s}', expected one of {}", names.join(", ")))
            })
    }
}

/// A fully specified reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducerSpec {
    pub method: Method,
    pub target_dim: usize,
    /// Neighbor count for graph-based methods.
    pub k: usize,
    /// LLE local Gram regularization, relative to the Gram trace.
    pub regularization: f64,
}

impl ReducerSpec {
    pub fn new(method: Method, target_dim: usize, k: usize) -> Self {
        Self {
            method,
            target_dim,
            k,
            regularization: DEFAULT_REGULARIZATION,
        }
    }

    /// Checks the spec against data of ambient dimension `ambient` with `n` points.
    pub fn validate(&self, n: usize, ambient: usize) -> Result<()> {
        let d = self.target_dim;
        if self.method == Method::Identity {
            return Ok(());
        }
        if d == 0 || d >= ambient {
            return Err(Error::Parameter(format!(
                "target dimension must be in [1, {}), got {d}",
                ambient
            )));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::Parameter("regularization must be finite and >= 0".into()));
        }
        if self.method.uses_neighbors() {
            let min_k = match self.method {
                Method::Hlle => hlle::min_neighbors(d),
                _ => d + 1,
            };
            if self.k < min_k || self.k >= n {
                return Err(Error::Parameter(format!(
                    "{} needs {min_k} <= k < n = {n}, got k = {}",
                    self.method, self.k
                )));
            }
        }
        Ok(())
    }
}

/// Runs the reduction described by `spec`.
pub fn reduce(x: &DataMatrix, spec: &ReducerSpec) -> Result<DataMatrix> {
    spec.validate(x.nrows(), x.ncols())?;
    let d = spec.target_dim;
    match spec.method {
        Method::Pca => pca(x, d),
        Method::Kpca2 => kpca(x, d),
        Method::Lle => Ok(lle_fit(x, d, spec.k, spec.regularization)?.embedding),
        Method::Hlle => hlle(x, d, spec.k),
        Method::Isomap => isomap(x, d, spec.k),
        Method::InfoLle => info_lle(x, d, spec.k),
        Method::Identity => Ok(x.clone()),
    }
}

/// Embedding from the bottom of the spectrum of an alignment matrix whose null
/// space contains the constant vector.
///
/// Of the `d + 1` smallest eigenvectors the one closest to the constant direction
/// is dropped; the rest are centered, sign-fixed and scaled by `sqrt(n)`. Returns
/// the embedding and the `d + 1` smallest eigenvalues.
pub(crate) fn null_space_embedding(m: DMatrix<f64>, d: usize) -> Result<(DataMatrix, Vec<f64>)> {
    let n = m.nrows();
    if d + 1 > n {
        return Err(Error::Parameter(format!("cannot take {} eigenvectors of a {n}x{n} matrix", d + 1)));
    }
    let (values, vectors) = symmetric_eigen_ascending(m)?;
    let alignment = |j: usize| vectors.column(j).sum().abs();
    let constant = (0..=d)
        .max_by(|&a, &b| alignment(a).total_cmp(&alignment(b)).then(b.cmp(&a)))
        .unwrap_or(0);
    let scale = (n as f64).sqrt();
    let mut out = DMatrix::zeros(n, d);
    for (dst, src) in (0..=d).filter(|&j| j != constant).enumerate() {
        let mut v: DVector<f64> = vectors.column(src).into_owned();
        let mean = v.mean();
        v.add_scalar_mut(-mean);
        fix_sign(&mut v);
        out.set_column(dst, &(v * scale));
    }
    Ok((DataMatrix::from_dmatrix(&out)?, values[..=d].to_vec()))
}
