//! Phase-space reconstruction of scalar time series.
//!
//! The delay is taken from the first minimum of the auto mutual information
//! and the dimension from Cao's E1 saturation test.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Default saturation threshold for `|E1(m) - 1|`.
pub const CAO_THRESHOLD: f64 = 0.05;

/// A finite, ordered sequence of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Input(format!(
                "time series needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Natural logarithm of every sample; all samples must be positive.
    pub fn log_transformed(&self) -> Result<Self> {
        if let Some(i) = self.values.iter().position(|&v| v <= 0.0) {
            return Err(Error::Input(format!(
                "log transform needs positive samples; sample {i} is {}",
                self.values[i]
            )));
        }
        Self::new(self.values.iter().map(|v| v.ln()).collect(), self.label.clone())
    }
}

/// Delay `tau` and dimension `m` of a delay embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmbeddingParameters {
    pub tau: usize,
    pub m: usize,
}

impl EmbeddingParameters {
    pub fn new(tau: usize, m: usize) -> Result<Self> {
        if tau == 0 || m == 0 {
            return Err(Error::Parameter(format!(
                "delay and dimension must be positive, got tau = {tau}, m = {m}"
            )));
        }
        Ok(Self { tau, m })
    }
}

/// Default histogram resolution `ceil(sqrt(n / 5))`, at least 2.
pub fn default_bins(len: usize) -> usize {
    ((len as f64 / 5.0).sqrt().ceil() as usize).max(2)
}

/// Auto mutual information for lags `1..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmiCurve {
    /// `values[i]` is the mutual information (nats) at lag `i + 1`.
    pub values: Vec<f64>,
    /// The series was constant, so every value is zero.
    pub constant: bool,
}

/// Equal-width binning over the range of the whole series.
struct Binning {
    min: f64,
    width: f64,
    bins: usize,
}

impl Binning {
    fn new(values: &[f64], bins: usize) -> Option<Self> {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (max > min).then(|| Self {
            min,
            width: (max - min) / bins as f64,
            bins,
        })
    }

    fn index(&self, v: f64) -> usize {
        (((v - self.min) / self.width) as usize).min(self.bins - 1)
    }
}

/// Mutual information of the pairs `(a[t], b[t])` from a joint histogram.
fn histogram_mi(a: &[usize], b: &[usize], bins: usize) -> f64 {
    let n = a.len() as f64;
    let mut joint = vec![0u32; bins * bins];
    let mut pa = vec![0u32; bins];
    let mut pb = vec![0u32; bins];
    for (&i, &j) in a.iter().zip(b) {
        joint[i * bins + j] += 1;
        pa[i] += 1;
        pb[j] += 1;
    }
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (pa[i] as f64 * pb[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

pub fn auto_mutual_information(s: &TimeSeries, max_lag: usize, bins: usize) -> Result<AmiCurve> {
    let n = s.len();
    if max_lag == 0 || max_lag >= n - 1 {
        return Err(Error::Parameter(format!(
            "max_lag must be in [1, {}], got {max_lag}",
            n.saturating_sub(2)
        )));
    }
    if bins < 2 {
        return Err(Error::Parameter(format!("need at least 2 bins, got {bins}")));
    }
    let Some(binning) = Binning::new(s.values(), bins) else {
        log::warn!("series '{}' is constant; mutual information is zero at every lag", s.label());
        return Ok(AmiCurve {
            values: vec![0.0; max_lag],
            constant: true,
        });
    };
    let idx: Vec<usize> = s.values().iter().map(|&v| binning.index(v)).collect();
    let values = (1..=max_lag)
        .into_par_iter()
        .map(|lag| histogram_mi(&idx[..n - lag], &idx[lag..], bins))
        .collect();
    Ok(AmiCurve {
        values,
        constant: false,
    })
}

/// Location of the first local minimum of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FirstMinimum {
    /// 1-based position (the lag, for an AMI curve).
    pub index: usize,
    /// False when no interior local minimum exists and `index` is the global minimum.
    pub local: bool,
}

pub fn first_minimum(values: &[f64]) -> Result<FirstMinimum> {
    if values.len() < 3 {
        return Err(Error::Parameter(format!(
            "first minimum needs at least 3 values, got {}",
            values.len()
        )));
    }
    for i in 1..values.len() - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            return Ok(FirstMinimum {
                index: i + 1,
                local: true,
            });
        }
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    Ok(FirstMinimum {
        index: best + 1,
        local: false,
    })
}

/// Outcome of Cao's dimension test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaoResult {
    pub dimension: usize,
    /// `e1[i]` is `E1(i + 1)`.
    pub e1: Vec<f64>,
    /// `e2[i]` is `E2(i + 1)`.
    pub e2: Vec<f64>,
    /// False when E1 never saturated and `dimension` fell back to `m_max`.
    pub saturated: bool,
}

/// Mean expansion ratio `E(m)` and mean next-sample gap `E*(m)`.
fn cao_means(x: &[f64], tau: usize, m: usize) -> (f64, f64) {
    let count = x.len() - m * tau;
    let dist_m = |i: usize, j: usize| -> f64 {
        (0..m).map(|c| (x[i + c * tau] - x[j + c * tau]).abs()).fold(0.0, f64::max)
    };
    let sums = (0..count)
        .into_par_iter()
        .filter_map(|i| {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..count {
                if j == i {
                    continue;
                }
                let d = dist_m(i, j);
                // coincident vectors carry no ratio information
                if d > 0.0 && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            best.map(|(d, j)| {
                let extra = (x[i + m * tau] - x[j + m * tau]).abs();
                (d.max(extra) / d, extra)
            })
        })
        .collect::<Vec<_>>();
    let used = sums.len().max(1) as f64;
    let (a, e): (f64, f64) = sums.iter().fold((0.0, 0.0), |(sa, se), (a, e)| (sa + a, se + e));
    (a / used, e / used)
}

/// Cao's minimum embedding dimension.
///
/// `E1(m) = E(m+1) / E(m)` is evaluated for `m = 1..m_max-1`. The result is the
/// smallest `m` with `|E1(m) - 1| < threshold` and `|E1(m+1) - 1| < threshold`;
/// without saturation `m_max` is returned. `E2(m) = E*(m+1) / E*(m)` is reported
/// alongside for telling noise (E2 close to 1 everywhere) from deterministic signals.
pub fn cao_dimension(s: &TimeSeries, tau: usize, m_max: usize, threshold: f64) -> Result<CaoResult> {
    if tau == 0 || m_max < 2 {
        return Err(Error::Parameter(format!(
            "Cao's method needs tau >= 1 and m_max >= 2, got tau = {tau}, m_max = {m_max}"
        )));
    }
    if m_max * tau + 1 >= s.len() {
        return Err(Error::Parameter(format!(
            "series of length {} is too short for m_max = {m_max} at tau = {tau}",
            s.len()
        )));
    }
    let means: Vec<(f64, f64)> = (1..=m_max).map(|m| cao_means(s.values(), tau, m)).collect();
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    let e1: Vec<f64> = means.windows(2).map(|w| ratio(w[1].0, w[0].0)).collect();
    let e2: Vec<f64> = means.windows(2).map(|w| ratio(w[1].1, w[0].1)).collect();

    let close = |v: f64| (v - 1.0).abs() < threshold;
    let found = e1
        .windows(2)
        .position(|w| close(w[0]) && close(w[1]))
        .map(|i| i + 1);
    let (dimension, saturated) = match found {
        Some(m) => (m, true),
        None => (m_max, false),
    };
    Ok(CaoResult {
        dimension,
        e1,
        e2,
        saturated,
    })
}

/// Delay vectors `(x_t, x_{t-tau}, ..., x_{t-(m-1)tau})` for `t = (m-1)tau .. len-1`, one per row.
pub fn delay_embed(s: &TimeSeries, p: EmbeddingParameters) -> Result<DataMatrix> {
    let span = (p.m - 1) * p.tau;
    if span >= s.len() {
        return Err(Error::Parameter(format!(
            "(m - 1) * tau = {span} must be smaller than the series length {}",
            s.len()
        )));
    }
    let x = s.values();
    let rows = s.len() - span;
    let data = (0..rows)
        .flat_map(|r| {
            let t = r + span;
            (0..p.m).map(move |c| x[t - c * p.tau])
        })
        .collect();
    DataMatrix::from_row_major(rows, p.m, data)
}

/// Delay and dimension chosen from a series, with the curves behind the choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSelection {
    pub parameters: EmbeddingParameters,
    pub ami: AmiCurve,
    /// False when the AMI curve had no interior minimum and its global minimum was used.
    pub tau_from_local_minimum: bool,
    pub cao: CaoResult,
}

/// Default largest AMI lag: a quarter of the series, capped at 200.
pub fn default_max_lag(len: usize) -> usize {
    (len / 4).clamp(3, 200)
}

/// Picks `tau` at the first AMI minimum, then `m` by Cao's method at that delay.
pub fn select_parameters(s: &TimeSeries, max_lag: usize, bins: usize, m_max: usize) -> Result<ParameterSelection> {
    let ami = auto_mutual_information(s, max_lag, bins)?;
    let minimum = first_minimum(&ami.values)?;
    if !minimum.local {
        log::warn!("AMI has no interior minimum up to lag {max_lag}; using the global minimum");
    }
    let tau = minimum.index;
    let cao = cao_dimension(s, tau, m_max, CAO_THRESHOLD)?;
    if !cao.saturated {
        log::warn!("Cao's E1 did not saturate up to m = {m_max}");
    }
    Ok(ParameterSelection {
        parameters: EmbeddingParameters::new(tau, cao.dimension)?,
        ami,
        tau_from_local_minimum: minimum.local,
        cao,
    })
}
