use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use erpm::data_io::{
    load_matrix_csv, load_series_csv, s_curve, swiss_roll, write_matrix_csv, ColumnSelector, HeaderPolicy,
    DEFAULT_M_MAX,
};
use erpm::harness::{
    correlation_matrix, joint_export, read_sweep_csv, run_sweep, write_outputs, ReducerEntry, SweepConfig,
};
use erpm::metrics::evaluate;
use erpm::reducers::{reduce, Method, ReducerSpec, DEFAULT_REGULARIZATION};
use erpm::takens::{
    auto_mutual_information, cao_dimension, default_bins, default_max_lag, delay_embed, first_minimum,
    EmbeddingParameters, CAO_THRESHOLD,
};
use erpm::{Error, Result};

/// Entropy rank preservation and companion quality metrics for embeddings.
#[derive(Parser)]
#[command(name = "erpm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Choose delay and dimension for a series and optionally write its delay embedding.
    Takens(TakensArgs),
    /// Reduce a point cloud.
    Reduce(ReduceArgs),
    /// Evaluate an embedding against the original points.
    Evaluate(EvaluateArgs),
    /// Run a k-sweep over several reducers.
    Sweep(SweepArgs),
    /// Correlate the global metrics of one or more sweep.csv files.
    Correlate(CorrelateArgs),
    /// Export per-point ERPM and Procrustes values.
    Joint(JointArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    SCurve,
    SwissRoll,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "s-curve")]
    kind: GeneratorKind,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV of points.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV of the intrinsic coordinates.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct TakensArgs {
    /// Series CSV.
    #[arg(long)]
    input: PathBuf,
    /// Column name or zero-based index.
    #[arg(long, default_value = "0")]
    column: ColumnSelector,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    /// Take natural logs before embedding.
    #[arg(long)]
    log_transform: bool,
    /// Fixed delay instead of the first AMI minimum.
    #[arg(long)]
    tau: Option<usize>,
    /// Fixed dimension instead of Cao's estimate.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    /// Write the delay embedding to this CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the AMI and Cao curves as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    method: Method,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_REGULARIZATION)]
    regularization: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Original points.
    #[arg(long)]
    x: PathBuf,
    /// Embedded points, same row order.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Write the full report, including per-point values, as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Comma-separated reducers replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// One or more sweep.csv files; cells are pooled across them.
    #[arg(required = true)]
    sweeps: Vec<PathBuf>,
    /// Directory for correlation.csv and per-file correlation_<i>.csv; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JointArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 15)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Takens(a) => takens(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Correlate(a) => correlate(a),
        Command::Joint(a) => joint(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let data = match a.kind {
        GeneratorKind::SCurve => s_curve(a.n, a.noise, a.seed)?,
        GeneratorKind::SwissRoll => swiss_roll(a.n, a.noise, a.seed)?,
    };
    write_matrix_csv(&a.out, &data.points, Some(&["x", "y", "z"]))?;
    if let Some(path) = a.truth {
        write_matrix_csv(&path, &data.ground_truth, Some(&["t", "u"]))?;
    }
    Ok(())
}

fn takens(a: TakensArgs) -> Result<()> {
    let header = if a.no_header { HeaderPolicy::Absent } else { HeaderPolicy::Present };
    let mut series = load_series_csv(&a.input, &a.column, header)?;
    if a.log_transform {
        series = series.log_transformed()?;
    }
    let len = series.len();
    let ami = match a.tau {
        Some(_) => None,
        None => Some(auto_mutual_information(
            &series,
            a.max_lag.unwrap_or_else(|| default_max_lag(len)),
            a.bins.unwrap_or_else(|| default_bins(len)),
        )?),
    };
    let (tau, local) = match (a.tau, &ami) {
        (Some(t), _) => (t, true),
        (None, Some(curve)) => {
            let min = first_minimum(&curve.values)?;
            (min.index, min.local)
        }
        (None, None) => unreachable!(),
    };
    if !local {
        log::warn!("AMI has no interior minimum; tau is the global minimum");
    }
    let cao = match a.m {
        Some(_) => None,
        None => Some(cao_dimension(&series, tau, a.m_max, CAO_THRESHOLD)?),
    };
    let m = a.m.or(cao.as_ref().map(|c| c.dimension)).unwrap_or(1);
    let params = EmbeddingParameters::new(tau, m)?;
    match &cao {
        Some(c) if !c.saturated => println!("tau={tau} m={m} (E1 did not saturate up to m_max = {})", a.m_max),
        _ => println!("tau={tau} m={m}"),
    }
    if let Some(path) = a.report {
        let report = serde_json::json!({
            "series": series.label(),
            "length": len,
            "log_transform": a.log_transform,
            "tau": tau,
            "m": m,
            "tau_from_local_minimum": local,
            "ami": ami,
            "cao": cao,
        });
        write_text(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    if let Some(path) = a.out {
        let x = delay_embed(&series, params)?;
        let header: Vec<String> = (0..m).map(|c| format!("lag{}", c * tau)).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_matrix_csv(&path, &x, Some(&header))?;
    }
    Ok(())
}

fn reduce_cmd(a: ReduceArgs) -> Result<()> {
    let x = load_matrix_csv(&a.input)?;
    let spec = ReducerSpec {
        method: a.method,
        target_dim: a.dim,
        k: a.k,
        regularization: a.regularization,
    };
    let y = reduce(&x, &spec)?;
    let header: Vec<String> = (1..=y.ncols()).map(|c| format!("y{c}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_matrix_csv(&a.out, &y, Some(&header))
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let x = load_matrix_csv(&a.x)?;
    let y = load_matrix_csv(&a.y)?;
    let report = evaluate(&x, &y, a.k)?;
    println!("{}", serde_json::to_string_pretty(&report.globals())?);
    if let Some(path) = a.out {
        write_text(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut config = SweepConfig::from_path(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
        config.dataset.seed = None;
    }
    if let Some(dir) = a.out {
        config.output_dir = dir;
    }
    if let Some(k) = a.k_min {
        config.sweep.k_min = k;
    }
    if let Some(k) = a.k_max {
        config.sweep.k_max = k;
    }
    if let Some(methods) = a.method {
        let previous = std::mem::take(&mut config.reducers);
        config.reducers = methods
            .into_iter()
            .map(|m| {
                previous
                    .iter()
                    .find(|r| r.method == m)
                    .cloned()
                    .unwrap_or_else(|| ReducerEntry::from(m))
            })
            .collect();
    }
    if let Some(d) = a.dim {
        config.target_dim = d;
        for r in &mut config.reducers {
            r.target_dim = None;
        }
    }
    let run = run_sweep(&config)?;
    let written = write_outputs(&run, &config.output_dir)?;
    for cell in run.result.failures() {
        eprintln!(
            "cell ({}, k={}) failed: {}",
            cell.method,
            cell.k,
            cell.error.as_deref().unwrap_or("unknown error")
        );
    }
    for (method, e) in &run.joint_failures {
        eprintln!("joint export ({method}, k={}) failed: {e}", config.joint_k);
    }
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn correlate(a: CorrelateArgs) -> Result<()> {
    let mut pooled = Vec::new();
    let mut per_file = Vec::new();
    for path in &a.sweeps {
        let samples: Vec<[f64; 4]> = read_sweep_csv(path)?.into_iter().filter_map(|r| r.metrics).collect();
        pooled.extend_from_slice(&samples);
        per_file.push(samples);
    }
    let matrix = correlation_matrix(&pooled)?;
    match a.out {
        None => print!("{}", matrix.to_csv()),
        Some(dir) => {
            write_text(&dir.join("correlation.csv"), &matrix.to_csv())?;
            if a.sweeps.len() > 1 {
                for (i, (path, samples)) in a.sweeps.iter().zip(&per_file).enumerate() {
                    let name = format!("correlation_{}.csv", i + 1);
                    match correlation_matrix(samples) {
                        Ok(m) => {
                            write_text(&dir.join(&name), &m.to_csv())?;
                            println!("{name}: {}", path.display());
                        }
                        Err(e) => eprintln!("{}: {e}", path.display()),
                    }
                }
            }
        }
    }
    Ok(())
}

fn joint(a: JointArgs) -> Result<()> {
    let x = load_matrix_csv(&a.x)?;
    let y = load_matrix_csv(&a.y)?;
    let table = joint_export(&x, &y, a.k)?;
    write_text(&a.out, &table.to_csv())
}
