//! Experiment orchestration: k-sweeps over several reducers, metric
//! correlation matrices and per-point joint exports.
//!
//! Every output file except `run_meta.json` (which records timings) is a pure
//! function of the configuration and seed.

mod correlation;

pub use correlation::{correlation_matrix, metric_vector, CorrelationMatrix, METRIC_LABELS};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_io::{format_float, write_file, DatasetSpec};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::metrics::{GlobalMetrics, LocalMetricRecord, Reference};
use crate::reducers::{reduce, Method, ReducerSpec, DEFAULT_REGULARIZATION};
use crate::takens::EmbeddingParameters;

pub const DEFAULT_TARGET_DIM: usize = 2;
pub const DEFAULT_JOINT_K: usize = 15;

/// One reducer in a sweep. Unset fields inherit from the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducerEntry {
    pub method: Method,
    /// Neighbor count of the fit; defaults to the sweep's `k_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<f64>,
}

impl From<Method> for ReducerEntry {
    fn from(method: Method) -> Self {
        Self {
            method,
            k: None,
            target_dim: None,
            regularization: None,
        }
    }
}

/// Inclusive range of metric neighborhood sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRange {
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_k_min() -> usize {
    1
}

fn default_k_max() -> usize {
    20
}

impl Default for KRange {
    fn default() -> Self {
        Self {
            k_min: default_k_min(),
            k_max: default_k_max(),
        }
    }
}

fn default_reducers() -> Vec<ReducerEntry> {
    [Method::Pca, Method::Kpca2, Method::Lle, Method::Hlle, Method::Isomap, Method::InfoLle]
        .into_iter()
        .map(ReducerEntry::from)
        .collect()
}

fn default_target_dim() -> usize {
    DEFAULT_TARGET_DIM
}

fn default_joint_k() -> usize {
    DEFAULT_JOINT_K
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// A complete sweep description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "default_reducers")]
    pub reducers: Vec<ReducerEntry>,
    #[serde(default)]
    pub sweep: KRange,
    #[serde(default = "default_target_dim")]
    pub target_dim: usize,
    /// Neighborhood size of the per-point joint exports.
    #[serde(default = "default_joint_k")]
    pub joint_k: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl SweepConfig {
    /// A config with every default and the given dataset.
    pub fn new(dataset: DatasetSpec) -> Self {
        Self {
            dataset,
            reducers: default_reducers(),
            sweep: KRange::default(),
            target_dim: DEFAULT_TARGET_DIM,
            joint_k: DEFAULT_JOINT_K,
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Reducer specs with defaults resolved.
    pub fn reducer_specs(&self) -> Vec<ReducerSpec> {
        self.reducers
            .iter()
            .map(|r| ReducerSpec {
                method: r.method,
                target_dim: r.target_dim.unwrap_or(self.target_dim),
                k: r.k.unwrap_or(self.sweep.k_max),
                regularization: r.regularization.unwrap_or(DEFAULT_REGULARIZATION),
            })
            .collect()
    }

    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        let KRange { k_min, k_max } = self.sweep;
        if k_min == 0 || k_min > k_max {
            return Err(Error::Parameter(format!(
                "sweep range must satisfy 1 <= k_min <= k_max, got [{k_min}, {k_max}]"
            )));
        }
        if self.joint_k == 0 {
            return Err(Error::Parameter("joint_k must be positive".into()));
        }
        if self.target_dim == 0 {
            return Err(Error::Parameter("target_dim must be positive".into()));
        }
        if self.reducers.is_empty() {
            return Err(Error::Parameter("no reducers configured".into()));
        }
        let mut methods: Vec<Method> = self.reducers.iter().map(|r| r.method).collect();
        methods.sort();
        if let Some(w) = methods.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!("reducer {} is listed twice", w[0])));
        }
        Ok(())
    }

    fn validate_for(&self, n: usize) -> Result<()> {
        if self.sweep.k_max >= n {
            return Err(Error::Parameter(format!(
                "k_max = {} must be smaller than the number of points {n}",
                self.sweep.k_max
            )));
        }
        if self.joint_k >= n {
            return Err(Error::Parameter(format!(
                "joint_k = {} must be smaller than the number of points {n}",
                self.joint_k
            )));
        }
        Ok(())
    }
}

/// Globals of one `(method, k)` cell, or the reason it has none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub method: Method,
    pub k: usize,
    pub metrics: Option<GlobalMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The sweep grid with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub k_range: KRange,
    pub dataset: DatasetSpec,
    pub reducers: Vec<ReducerSpec>,
    pub seed: u64,
    /// Ordered by reducer (config order), then by `k`.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, method: Method, k: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.method == method && c.k == k)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.metrics.is_none())
    }

    /// Metric vectors of the successful cells.
    pub fn samples(&self) -> Vec<[f64; 4]> {
        self.cells.iter().filter_map(|c| c.metrics.as_ref()).map(metric_vector).collect()
    }

    /// `sweep.csv` contents; failed cells carry `NA` metrics.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,k,w_n,w_v,r_procrustes,r_delta_h,degenerate_count\n");
        for c in &self.cells {
            match &c.metrics {
                Some(g) => out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.method,
                    c.k,
                    format_float(g.w_n),
                    format_float(g.w_v),
                    format_float(g.r_procrustes),
                    format_float(g.r_delta_h),
                    g.degenerate_count
                )),
                None => out.push_str(&format!("{},{},NA,NA,NA,NA,NA\n", c.method, c.k)),
            }
        }
        out
    }
}

/// Pearson correlations over every successful cell of the sweep.
pub fn correlation_report(sw: &SweepResult) -> Result<CorrelationMatrix> {
    correlation_matrix(&sw.samples())
}

/// Per-point metrics of one embedding at one neighborhood size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointExport {
    pub method: Option<Method>,
    pub k: usize,
    pub records: Vec<LocalMetricRecord>,
}

impl JointExport {
    pub fn file_name(&self) -> String {
        match self.method {
            Some(m) => format!("joint_{m}_k{}.csv", self.k),
            None => format!("joint_k{}.csv", self.k),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("point_index,delta_h,procrustes_local,degenerate\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.point_index,
                format_float(r.delta_h),
                format_float(r.procrustes_local),
                r.degenerate
            ));
        }
        out
    }
}

/// Per-point ERPM and Procrustes values of `y` against `x` at neighborhood size `k`.
pub fn joint_export(x: &DataMatrix, y: &DataMatrix, k: usize) -> Result<JointExport> {
    let reference = Reference::new(x, k)?;
    let records = reference.compare(y)?.locals(k)?;
    Ok(JointExport {
        method: None,
        k,
        records,
    })
}

/// How a reducer fit went.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub spec: ReducerSpec,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Wall-clock seconds of each phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub load: f64,
    pub reference: f64,
    pub fits: f64,
    pub evaluation: f64,
}

/// Everything a sweep produced.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub config: SweepConfig,
    pub result: SweepResult,
    pub joints: Vec<JointExport>,
    /// `(method, error)` for joint exports that could not be computed.
    pub joint_failures: Vec<(Method, String)>,
    pub fits: Vec<FitRecord>,
    pub points: usize,
    pub ambient_dim: usize,
    pub embedding: Option<EmbeddingParameters>,
    pub timings: Timings,
}

/// Loads the dataset, fits every reducer once and evaluates every `k` in the range.
///
/// Reducer and cell failures are recorded, not returned; errors are reserved
/// for an invalid config or dataset.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepRun> {
    config.validate()?;
    let t0 = Instant::now();
    let data = config.dataset.load(config.seed)?;
    let x = &data.points;
    let (n, ambient) = (x.nrows(), x.ncols());
    config.validate_for(n)?;
    let load = t0.elapsed().as_secs_f64();
    log::info!("dataset: {n} points in {ambient} dimensions");

    let t1 = Instant::now();
    let reference = Reference::new(x, config.sweep.k_max.max(config.joint_k))?;
    let reference_time = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let specs = config.reducer_specs();
    let fitted: Vec<(std::result::Result<DataMatrix, String>, f64)> = specs
        .par_iter()
        .map(|spec| {
            let start = Instant::now();
            let y = reduce(x, spec).map_err(|e| e.to_string());
            if let Err(e) = &y {
                log::warn!("{} failed: {e}", spec.method);
            }
            (y, start.elapsed().as_secs_f64())
        })
        .collect();
    let fits_time = t2.elapsed().as_secs_f64();

    let t3 = Instant::now();
    let ks: Vec<usize> = (config.sweep.k_min..=config.sweep.k_max).collect();
    let mut cells = Vec::with_capacity(specs.len() * ks.len());
    let mut joints = Vec::new();
    let mut joint_failures = Vec::new();
    for (spec, (fit, _)) in specs.iter().zip(&fitted) {
        let comparison = fit.as_ref().map_err(Clone::clone).and_then(|y| reference.compare(y).map_err(|e| e.to_string()));
        let row: Vec<SweepCell> = ks
            .par_iter()
            .map(|&k| {
                let outcome = comparison
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|c| c.report(k).map_err(|e| e.to_string()));
                match outcome {
                    Ok(r) => SweepCell {
                        method: spec.method,
                        k,
                        metrics: Some(r.globals()),
                        error: None,
                    },
                    Err(e) => SweepCell {
                        method: spec.method,
                        k,
                        metrics: None,
                        error: Some(e),
                    },
                }
            })
            .collect();
        cells.extend(row);
        match comparison.and_then(|c| c.locals(config.joint_k).map_err(|e| e.to_string())) {
            Ok(records) => joints.push(JointExport {
                method: Some(spec.method),
                k: config.joint_k,
                records,
            }),
            Err(e) => joint_failures.push((spec.method, e)),
        }
    }
    let evaluation = t3.elapsed().as_secs_f64();

    let fits = specs
        .iter()
        .zip(&fitted)
        .map(|(spec, (fit, seconds))| FitRecord {
            spec: *spec,
            seconds: *seconds,
            error: fit.as_ref().err().cloned(),
        })
        .collect();
    Ok(SweepRun {
        config: config.clone(),
        result: SweepResult {
            k_range: config.sweep,
            dataset: config.dataset.clone(),
            reducers: specs,
            seed: config.seed,
            cells,
        },
        joints,
        joint_failures,
        fits,
        points: n,
        ambient_dim: ambient,
        embedding: data.embedding,
        timings: Timings {
            load,
            reference: reference_time,
            fits: fits_time,
            evaluation,
        },
    })
}

/// Writes `sweep.csv`, `correlation.csv`, the joint exports and `run_meta.json` into `dir`.
///
/// The correlation file is skipped (and the reason recorded) when fewer than
/// three cells succeeded. Returns the written paths.
pub fn write_outputs(run: &SweepRun, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    fn emit(dir: &Path, written: &mut Vec<PathBuf>, name: &str, contents: &str) -> Result<()> {
        let path = dir.join(name);
        write_file(&path, contents.as_bytes())?;
        written.push(path);
        Ok(())
    }
    emit(dir, &mut written, "sweep.csv", &run.result.to_csv())?;
    let correlation = correlation_report(&run.result);
    match &correlation {
        Ok(c) => emit(dir, &mut written, "correlation.csv", &c.to_csv())?,
        Err(e) => log::warn!("correlation.csv not written: {e}"),
    }
    for j in &run.joints {
        emit(dir, &mut written, &j.file_name(), &j.to_csv())?;
    }
    let failures: Vec<_> = run
        .result
        .failures()
        .map(|c| serde_json::json!({ "method": c.method, "k": c.k, "error": c.error }))
        .collect();
    let joint_failures: Vec<_> = run
        .joint_failures
        .iter()
        .map(|(m, e)| serde_json::json!({ "method": m, "k": run.config.joint_k, "error": e }))
        .collect();
    let meta = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": run.config.seed,
        "config": run.config,
        "dataset": {
            "points": run.points,
            "dimensions": run.ambient_dim,
            "delay_embedding": run.embedding,
        },
        "fits": run.fits,
        "failed_cells": failures,
        "failed_joint_exports": joint_failures,
        "correlation": match &correlation {
            Ok(c) => serde_json::json!({ "samples": c.samples, "constant_columns": c.constant }),
            Err(e) => serde_json::json!({ "skipped": e.to_string() }),
        },
        "timings_seconds": run.timings,
        "outputs": written.iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    emit(dir, &mut written, "run_meta.json", &text)?;
    Ok(written)
}

/// A row of a `sweep.csv` file.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub k: usize,
    pub metrics: Option<[f64; 4]>,
}

/// Reads a `sweep.csv` written by [`write_outputs`].
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("{}: missing column '{name}'", path.display())))
    };
    let method_col = column("method")?;
    let k_col = column("k")?;
    let metric_cols = METRIC_LABELS.map(column);
    let metric_cols: Vec<usize> = metric_cols.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = r + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let k = field(k_col)
            .parse()
            .map_err(|_| Error::Input(format!("{} line {line}: bad k '{}'", path.display(), field(k_col))))?;
        let raw: Vec<&str> = metric_cols.iter().map(|&c| field(c)).collect();
        let metrics = if raw.iter().all(|v| *v == "NA") {
            None
        } else {
            let mut m = [0.0; 4];
            for (dst, v) in m.iter_mut().zip(&raw) {
                *dst = v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Input(format!("{} line {line}: bad metric '{v}'", path.display())))?;
            }
            Some(m)
        };
        rows.push(SweepRow {
            method: field(method_col).to_string(),
            k,
            metrics,
        });
    }
    Ok(rows)
}
