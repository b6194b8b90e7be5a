//! Embedding quality metrics: entropy rank preservation (ERPM), local
//! conformal Procrustes and the co-ranking based mean relative rank errors.
//!
//! Neighborhoods are always found in the original space and carried to the
//! embedding by index.

mod coranking;
mod erpm;
mod procrustes;

pub use coranking::{coranking, mrre, mrre_normalizer, CorankingMatrix};
pub use erpm::{erpm_global, erpm_local};
pub use procrustes::procrustes_local;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::neighborhoods::{center_columns, knn_index, neighborhood_matrix, rank_table, NeighborhoodIndex, RankTable};

/// Metric values for one neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMetricRecord {
    pub point_index: usize,
    /// `H(Yc) - H(Xc)` in nats; NaN when `degenerate` is set.
    pub delta_h: f64,
    /// Normalized conformal Procrustes residual; NaN only when the original neighborhood is a single point.
    pub procrustes_local: f64,
    /// Either centered neighborhood has an all-zero spectrum.
    pub degenerate: bool,
}

/// Local records plus global aggregates for one `(X, Y, k)` triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub k: usize,
    pub n: usize,
    pub locals: Vec<LocalMetricRecord>,
    pub r_delta_h: f64,
    pub r_procrustes: f64,
    pub w_n: f64,
    pub w_v: f64,
    pub degenerate_count: usize,
}

impl MetricReport {
    pub fn globals(&self) -> GlobalMetrics {
        GlobalMetrics {
            w_n: self.w_n,
            w_v: self.w_v,
            r_procrustes: self.r_procrustes,
            r_delta_h: self.r_delta_h,
            degenerate_count: self.degenerate_count,
        }
    }
}

/// The four summary metrics and the degenerate count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct GlobalMetrics {
    pub w_n: f64,
    pub w_v: f64,
    pub r_procrustes: f64,
    pub r_delta_h: f64,
    pub degenerate_count: usize,
}

/// Precomputed state of the original space: rank table and a `k_max`-NN index.
#[derive(Debug, Clone)]
pub struct Reference<'a> {
    x: &'a DataMatrix,
    ranks: RankTable,
    knn: NeighborhoodIndex,
}

impl<'a> Reference<'a> {
    pub fn new(x: &'a DataMatrix, k_max: usize) -> Result<Self> {
        Ok(Self {
            x,
            knn: knn_index(x, k_max)?,
            ranks: rank_table(x)?,
        })
    }

    pub fn data(&self) -> &DataMatrix {
        self.x
    }

    pub fn k_max(&self) -> usize {
        self.knn.k()
    }

    /// Pairs the reference with an embedding of the same points.
    pub fn compare<'b>(&'b self, y: &'b DataMatrix) -> Result<Comparison<'b, 'a>> {
        if y.nrows() != self.x.nrows() {
            return Err(Error::Input(format!(
                "embedding has {} points, original has {}",
                y.nrows(),
                self.x.nrows()
            )));
        }
        let q = coranking(&self.ranks, &rank_table(y)?)?;
        Ok(Comparison {
            reference: self,
            y,
            coranking: q,
        })
    }
}

/// An original/embedding pair ready to be evaluated at any `k <= k_max`.
#[derive(Debug, Clone)]
pub struct Comparison<'b, 'a> {
    reference: &'b Reference<'a>,
    y: &'b DataMatrix,
    coranking: CorankingMatrix,
}

impl Comparison<'_, '_> {
    pub fn coranking(&self) -> &CorankingMatrix {
        &self.coranking
    }

    /// Local records for every point at neighborhood size `k`.
    pub fn locals(&self, k: usize) -> Result<Vec<LocalMetricRecord>> {
        let idx = self.reference.knn.truncate(k)?;
        let x = self.reference.x;
        let y = self.y;
        (0..x.nrows())
            .into_par_iter()
            .map(|i| {
                let xc = center_columns(&neighborhood_matrix(x, &idx, i));
                let yc = center_columns(&neighborhood_matrix(y, &idx, i));
                local_record(i, &xc, &yc)
            })
            .collect()
    }

    pub fn report(&self, k: usize) -> Result<MetricReport> {
        let locals = self.locals(k)?;
        let deltas: Vec<Option<f64>> = locals
            .iter()
            .map(|r| (!r.degenerate).then_some(r.delta_h))
            .collect();
        let (r_delta_h, degenerate_count) = erpm_global(&deltas)?;
        let (sum, used) = locals
            .iter()
            .filter(|r| !r.procrustes_local.is_nan())
            .fold((0.0, 0usize), |(s, c), r| (s + r.procrustes_local, c + 1));
        let r_procrustes = sum / used as f64;
        let (w_n, w_v) = mrre(&self.coranking, k)?;
        Ok(MetricReport {
            k,
            n: locals.len(),
            locals,
            r_delta_h,
            r_procrustes,
            w_n,
            w_v,
            degenerate_count,
        })
    }
}

fn local_record(
    i: usize,
    xc: &nalgebra::DMatrix<f64>,
    yc: &nalgebra::DMatrix<f64>,
) -> Result<LocalMetricRecord> {
    let (delta_h, degenerate) = match erpm_local(xc, yc) {
        Ok(v) => (v, false),
        Err(Error::DegenerateSpectrum) => (f64::NAN, true),
        Err(e) => return Err(e),
    };
    let procrustes_local = match procrustes_local(xc, yc) {
        Ok(v) => v,
        Err(Error::DegenerateSpectrum) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(LocalMetricRecord {
        point_index: i,
        delta_h,
        procrustes_local,
        degenerate,
    })
}

/// Evaluates an embedding `y` of `x` with neighborhoods of size `k`; MRRE uses `K = k`.
pub fn evaluate(x: &DataMatrix, y: &DataMatrix, k: usize) -> Result<MetricReport> {
    Reference::new(x, k)?.compare(y)?.report(k)
}
