//! LLE variant whose neighborhoods and weights come from a symmetrized
//! Kullback-Leibler divergence between per-point discrete distributions.
//!
//! Each row `x_i` (e.g. a delay vector) becomes a distribution over its `m`
//! coordinates: a Gaussian kernel density estimate over the row's own values,
//! evaluated at those values, floored and normalized. Neighbors are the `k`
//! rows of smallest divergence; the weight row is the divergences normalized to
//! sum 1 over the neighbor set.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

use super::lle::alignment_from_weights;
use super::null_space_embedding;

/// Lower bound applied to every density value before normalization.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Silverman's rule-of-thumb bandwidth for a small sample.
fn silverman_bandwidth(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / m;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantile = |q: f64| {
        let pos = q * (m - 1.0);
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * m.powf(-0.2)
}

/// Discrete distribution over the coordinates of one row.
pub fn kde_distribution(row: &[f64]) -> Result<Vec<f64>> {
    let m = row.len();
    if m == 0 {
        return Err(Error::Input("cannot build a distribution from an empty row".into()));
    }
    let h = silverman_bandwidth(row);
    let mut p: Vec<f64> = if h > 0.0 {
        row.iter()
            .map(|&t| {
                let s: f64 = row.iter().map(|&u| (-0.5 * ((t - u) / h).powi(2)).exp()).sum();
                (s / (m as f64 * h * (2.0 * std::f64::consts::PI).sqrt())).max(PROBABILITY_FLOOR)
            })
            .collect()
    } else {
        vec![1.0; m]
    };
    let total: f64 = p.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Input("row has no positive probability mass".into()));
    }
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

/// `sum_t p_t ln(p_t / q_t) + sum_t q_t ln(q_t / p_t)`.
pub fn symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| a * (a / b).ln() + b * (b / a).ln())
        .sum()
}

pub fn info_lle(x: &DataMatrix, d: usize, k: usize) -> Result<DataMatrix> {
    let n = x.nrows();
    if d == 0 || k < d + 1 || k >= n {
        return Err(Error::Parameter(format!(
            "info-LLE needs d + 1 <= k < n, got k = {k}, d = {d}, n = {n}"
        )));
    }
    let dists: Vec<Vec<f64>> = x.rows().map(kde_distribution).collect::<Result<_>>()?;
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut h: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (symmetric_kl(&dists[i], &dists[j]), j))
                .collect();
            h.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            h.truncate(k);
            let total: f64 = h.iter().map(|e| e.0).sum();
            let weights = if total > 0.0 {
                h.iter().map(|e| e.0 / total).collect()
            } else {
                vec![1.0 / k as f64; k]
            };
            (h.into_iter().map(|e| e.1).collect(), weights)
        })
        .collect();
    let mut w = DMatrix::zeros(n, n);
    for (i, (nb, wt)) in rows.iter().enumerate() {
        for (&j, &v) in nb.iter().zip(wt) {
            w[(i, j)] = v;
        }
    }
    let m = alignment_from_weights(&w, |i| rows[i].0.as_slice());
    Ok(null_space_embedding(m, d)?.0)
}
