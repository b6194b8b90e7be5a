//! Pearson correlation between the four global metrics over a pool of sweep cells.

use serde::Serialize;

use crate::data_io::format_float;
use crate::error::{Error, Result};
use crate::metrics::GlobalMetrics;

/// Column order of every correlation matrix.
pub const METRIC_LABELS: [&str; 4] = ["w_n", "w_v", "r_procrustes", "r_delta_h"];

/// Spread below which a column counts as constant, relative to its magnitude.
const CONSTANT_TOLERANCE: f64 = 1e-12;

/// Symmetric 4x4 correlation matrix; `None` marks entries involving a constant column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub samples: usize,
    pub entries: [[Option<f64>; 4]; 4],
    /// Labels of columns that were constant over the pool.
    pub constant: Vec<&'static str>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = METRIC_LABELS.iter().position(|l| *l == a)?;
        let j = METRIC_LABELS.iter().position(|l| *l == b)?;
        self.entries[i][j]
    }

    /// Labeled CSV; undefined entries are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("metric,{}\n", METRIC_LABELS.join(","));
        for (label, row) in METRIC_LABELS.iter().zip(&self.entries) {
            out.push_str(label);
            for v in row {
                out.push(',');
                out.push_str(&v.map_or_else(|| "NA".to_string(), format_float));
            }
            out.push('\n');
        }
        out
    }
}

pub fn metric_vector(g: &GlobalMetrics) -> [f64; 4] {
    [g.w_n, g.w_v, g.r_procrustes, g.r_delta_h]
}

/// Pearson correlations between the columns of `samples`.
///
/// Rows are put in a canonical order first, so the result does not depend on
/// the order of the pool, bit for bit.
pub fn correlation_matrix(samples: &[[f64; 4]]) -> Result<CorrelationMatrix> {
    if samples.len() < 3 {
        return Err(Error::Input(format!(
            "correlation needs at least 3 cells, got {}",
            samples.len()
        )));
    }
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("correlation samples must be finite".into()));
    }
    let mut rows = samples.to_vec();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let n = rows.len() as f64;
    let mean: [f64; 4] = std::array::from_fn(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n);
    let constant: [bool; 4] = std::array::from_fn(|c| {
        let (lo, hi, mag) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, m), r| {
            (lo.min(r[c]), hi.max(r[c]), m.max(r[c].abs()))
        });
        hi - lo <= CONSTANT_TOLERANCE * mag.max(1.0)
    });
    let cross = |a: usize, b: usize| -> f64 {
        rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum()
    };
    let mut entries = [[None; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            if constant[a] || constant[b] {
                continue;
            }
            let r = if a == b {
                1.0
            } else {
                (cross(a, b) / (cross(a, a) * cross(b, b)).sqrt()).clamp(-1.0, 1.0)
            };
            entries[a][b] = Some(r);
            entries[b][a] = Some(r);
        }
    }
    Ok(CorrelationMatrix {
        samples: rows.len(),
        entries,
        constant: (0..4).filter(|&c| constant[c]).map(|c| METRIC_LABELS[c]).collect(),
    })
}
