//! Synthetic datasets and CSV ingestion/emission.
//!
//! Generators are pure functions of `(n, noise, seed)` using ChaCha8. CSV files
//! are comma separated with an optional single header row; floats are written
//! with 17 significant digits so values survive a round trip bit-exactly.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::takens::{
    auto_mutual_information, cao_dimension, default_bins, default_max_lag, delay_embed, first_minimum,
    EmbeddingParameters, TimeSeries, CAO_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    SCurve,
    SwissRoll,
    CsvSeries,
    CsvMatrix,
}

/// Which column of a series CSV to read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeaderPolicy {
    Present,
    Absent,
}

/// Default largest dimension tried by Cao's method for series datasets.
pub const DEFAULT_M_MAX: usize = 10;

/// Where a dataset comes from and how to build it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    /// Point count for generated datasets.
    #[serde(default = "default_points")]
    pub n: usize,
    #[serde(default)]
    pub noise: f64,
    /// Generator seed; falls back to the run seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<ColumnSelector>,
    #[serde(default = "default_header")]
    pub header: HeaderPolicy,
    /// Take natural logs of a series before embedding it.
    #[serde(default)]
    pub log_transform: bool,
    /// Fixed delay; chosen from the AMI curve when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    /// Fixed dimension; chosen by Cao's method when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

fn default_points() -> usize {
    2000
}

fn default_header() -> HeaderPolicy {
    HeaderPolicy::Present
}

impl DatasetSpec {
    pub fn generated(kind: DatasetKind, n: usize, noise: f64, seed: Option<u64>) -> Self {
        Self {
            kind,
            n,
            noise,
            seed,
            path: None,
            column: None,
            header: HeaderPolicy::Present,
            log_transform: false,
            tau: None,
            m: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DatasetKind::SCurve | DatasetKind::SwissRoll => check_generator(self.n, self.noise),
            DatasetKind::CsvMatrix | DatasetKind::CsvSeries => {
                if self.path.is_none() {
                    return Err(Error::Parameter(format!("dataset kind {:?} needs a path", self.kind)));
                }
                if self.kind == DatasetKind::CsvSeries && self.column.is_none() {
                    return Err(Error::Parameter("csv-series dataset needs a column".into()));
                }
                Ok(())
            }
        }
    }

    /// Builds the point cloud. Series are delay-embedded with the configured
    /// or automatically selected `(tau, m)`.
    pub fn load(&self, run_seed: u64) -> Result<LoadedDataset> {
        self.validate()?;
        let seed = self.seed.unwrap_or(run_seed);
        match self.kind {
            DatasetKind::SCurve | DatasetKind::SwissRoll => {
                let make = if self.kind == DatasetKind::SCurve { s_curve } else { swiss_roll };
                let d = make(self.n, self.noise, seed)?;
                Ok(LoadedDataset {
                    points: d.points,
                    ground_truth: Some(d.ground_truth),
                    embedding: None,
                })
            }
            DatasetKind::CsvMatrix => Ok(LoadedDataset {
                points: load_matrix_csv(self.path.as_deref().unwrap_or(Path::new("")))?,
                ground_truth: None,
                embedding: None,
            }),
            DatasetKind::CsvSeries => {
                let path = self.path.as_deref().unwrap_or(Path::new(""));
                let column = self.column.clone().unwrap_or(ColumnSelector::Index(0));
                let mut series = load_series_csv(path, &column, self.header)?;
                if self.log_transform {
                    series = series.log_transformed()?;
                }
                let len = series.len();
                let tau = match self.tau {
                    Some(tau) => tau,
                    None => {
                        let ami = auto_mutual_information(&series, default_max_lag(len), default_bins(len))?;
                        first_minimum(&ami.values)?.index
                    }
                };
                let m = match self.m {
                    Some(m) => m,
                    None => cao_dimension(&series, tau, DEFAULT_M_MAX, CAO_THRESHOLD)?.dimension,
                };
                let params = EmbeddingParameters::new(tau, m)?;
                Ok(LoadedDataset {
                    points: delay_embed(&series, params)?,
                    ground_truth: None,
                    embedding: Some(params),
                })
            }
        }
    }
}

/// A materialized dataset.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub points: DataMatrix,
    pub ground_truth: Option<DataMatrix>,
    /// Delay parameters used for series datasets.
    pub embedding: Option<EmbeddingParameters>,
}

/// Generated points with the parameters that produced them.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: DataMatrix,
    /// Intrinsic coordinates of each point (one row per point).
    pub ground_truth: DataMatrix,
}

/// S-curve in 3-D with intrinsic coordinates `(t, u)`.
///
/// `t ~ U[-3pi/2, 3pi/2]`, `u ~ U[0, 2]`, point `(sin t, u, sign(t)(cos t - 1))`
/// plus isotropic Gaussian noise of standard deviation `noise`.
pub fn s_curve(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_generator(n, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(3 * n);
    let mut truth = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = 3.0 * PI * (rng.random::<f64>() - 0.5);
        let u = 2.0 * rng.random::<f64>();
        let sign = if t > 0.0 {
            1.0
        } else if t < 0.0 {
            -1.0
        } else {
            0.0
        };
        points.extend([t.sin(), u, sign * (t.cos() - 1.0)]);
        truth.extend([t, u]);
    }
    add_noise(&mut points, noise, &mut rng);
    Ok(Dataset {
        points: DataMatrix::from_row_major(n, 3, points)?,
        ground_truth: DataMatrix::from_row_major(n, 2, truth)?,
    })
}

/// Swiss roll: `t ~ U[3pi/2, 9pi/2]`, `h ~ U[0, 21]`, point `(t cos t, h, t sin t)`.
pub fn swiss_roll(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_generator(n, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(3 * n);
    let mut truth = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
        let h = 21.0 * rng.random::<f64>();
        points.extend([t * t.cos(), h, t * t.sin()]);
        truth.extend([t, h]);
    }
    add_noise(&mut points, noise, &mut rng);
    Ok(Dataset {
        points: DataMatrix::from_row_major(n, 3, points)?,
        ground_truth: DataMatrix::from_row_major(n, 2, truth)?,
    })
}

fn check_generator(n: usize, noise: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("dataset needs at least one point".into()));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::Parameter(format!("noise must be finite and >= 0, got {noise}")));
    }
    Ok(())
}

fn add_noise(points: &mut [f64], noise: f64, rng: &mut ChaCha8Rng) {
    if noise > 0.0 {
        for v in points {
            let z: f64 = rng.sample(StandardNormal);
            *v += noise * z;
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn reader(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

/// Reads one numeric column of a CSV file as a time series, in file order.
pub fn load_series_csv(path: &Path, column: &ColumnSelector, header: HeaderPolicy) -> Result<TimeSeries> {
    let has_headers = header == HeaderPolicy::Present;
    let mut rdr = reader(path, has_headers)?;
    let col = match column {
        ColumnSelector::Index(i) => *i,
        ColumnSelector::Name(name) => {
            if !has_headers {
                return Err(Error::Input(format!(
                    "column '{name}' requested by name but the file has no header"
                )));
            }
            rdr.headers()?
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Input(format!("column '{name}' not found in {}", path.display())))?
        }
    };
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = r + 1 + usize::from(has_headers);
        let cell = rec
            .get(col)
            .ok_or_else(|| Error::Input(format!("line {line}: missing column {col}")))?;
        let v = parse_cell(cell, line, col)?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Input(format!("{} contains no data rows", path.display())));
    }
    let label = match column {
        ColumnSelector::Name(n) => n.clone(),
        ColumnSelector::Index(i) => format!("column {i}"),
    };
    TimeSeries::new(values, label)
}

fn parse_cell(cell: &str, line: usize, col: usize) -> Result<f64> {
    if cell.is_empty() {
        return Err(Error::Input(format!("line {line}, column {col}: empty cell")));
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| Error::Input(format!("line {line}, column {col}: '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Input(format!("line {line}, column {col}: '{cell}' is not finite")));
    }
    Ok(v)
}

/// Reads a rectangular numeric CSV, one point per row.
///
/// A first row in which no cell parses as a number is taken as a header.
pub fn load_matrix_csv(path: &Path) -> Result<DataMatrix> {
    let mut rdr = reader(path, false)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = r + 1;
        if r == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| parse_cell(cell, line, c))
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Input(format!(
                    "line {line}: expected {w} columns, found {}",
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Input(format!("{} contains no data rows", path.display())));
    }
    DataMatrix::from_rows(&rows)
}

/// Formats a float with 17 significant digits; NaN becomes `NA`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes a matrix as CSV with an optional header row.
pub fn write_matrix_csv(path: &Path, m: &DataMatrix, header: Option<&[&str]>) -> Result<()> {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
