//! Command-line front end. Data matrices are CSV with one row per variable
//! and one column per observation.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, write_bench_csv, BenchConfig};
use crate::datagen::{eigen_dispersion, gaussian_matrix, simulated_data, RandomSeed, Spacing};
use crate::error::{Error, Result};
use crate::io::{
    csv_io, format_real, read_data_csv, read_matrix_market_file, read_spectrum, write_json, write_matrix_csv,
    write_matrix_market_file, CompactRecord, ResultRecord,
};
use crate::kappa::{kappa_grid, trace_path, TruncationPath};
use crate::pipeline::{sample_spectrum, solve_covariance, solve_data, Algorithm, OutputForm, SolveOptions};
use crate::solver::EigenSpectrum;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "c3ma",
    version,
    about = "Nearest covariance matrix with a bounded condition number",
    after_help = "Data CSV files hold one variable per row and one observation per column (p rows, n columns).\n\
                  Exit codes: 0 success, 2 invalid flags or files, 3 all-zero input, 1 anything else."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance from a data matrix or a covariance matrix.
    Solve(SolveArgs),
    /// Time the three pipelines on standard Gaussian data.
    Bench(BenchArgs),
    /// Solutions along a grid of condition-number bounds.
    Trace(TraceArgs),
    /// Write a generated data matrix.
    Simulate(SimulateArgs),
    /// Mean sorted eigenvalues of sample covariances of N(0, I) data.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgorithmArg {
    #[value(name = "fu-spt")]
    FuSpt,
    #[value(name = "gr-svd")]
    GrSvd,
    #[value(name = "mod-svd")]
    ModSvd,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::FuSpt => Algorithm::FuSpt,
            AlgorithmArg::GrSvd => Algorithm::GrSvd,
            AlgorithmArg::ModSvd => Algorithm::ModSvd,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum SpacingArg {
    #[default]
    Linear,
    Log,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Data matrix CSV (p rows × n columns).
    #[arg(long, conflicts_with = "cov", required_unless_present = "cov")]
    pub input: Option<PathBuf>,
    /// Covariance matrix in Matrix Market array format.
    #[arg(long)]
    pub cov: Option<PathBuf>,
    /// Upper bound on the condition number, at least 1. Values in [1e4, 1e6] are a sensible start.
    #[arg(long)]
    pub kappa: f64,
    /// Defaults to mod-svd for data with p >= n and fu-spt otherwise.
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    /// Subtract each variable's mean before forming the covariance.
    #[arg(long)]
    pub center: bool,
    /// Write the approximation as a dense Matrix Market file.
    #[arg(long)]
    pub dense: Option<PathBuf>,
    /// Write the approximation in compact JSON form.
    #[arg(long)]
    pub compact: Option<PathBuf>,
    /// Result record destination; stdout when omitted.
    #[arg(long)]
    pub result: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated sizes; `a..b` or `a..b:step` expands to a range (step 50 by default).
    #[arg(long, value_delimiter = ',', required = true)]
    pub p_list: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["fu-spt", "gr-svd", "mod-svd"])]
    pub algorithms: Vec<AlgorithmArg>,
    #[arg(long, default_value_t = 1e4)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Eigenvalues of S_n, comma or whitespace separated; replaces the simulated data.
    #[arg(long, conflicts_with_all = ["p", "n", "sigma_cond_exp"])]
    pub spectrum: Option<PathBuf>,
    #[arg(long, required_unless_present = "spectrum")]
    pub p: Option<usize>,
    #[arg(long, required_unless_present = "spectrum")]
    pub n: Option<usize>,
    /// `i` in κ(Σ) = 10^(2i).
    #[arg(long, default_value_t = 1.0)]
    pub sigma_cond_exp: f64,
    #[arg(long, value_enum, default_value_t)]
    pub spacing: SpacingArg,
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value_t = 1.0)]
    pub kappa_min: f64,
    #[arg(long, default_value_t = 15.0)]
    pub kappa_max: f64,
    #[arg(long, default_value_t = 0.2)]
    pub kappa_step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    /// Draw from N(0, Σ) with κ(Σ) = 10^(2i); standard Gaussian entries when omitted.
    #[arg(long)]
    pub sigma_cond_exp: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub spacing: SpacingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleZeroMatrix => EXIT_INFEASIBLE,
        Error::InvalidInput(_)
        | Error::Shape(_)
        | Error::InvalidIndex(_)
        | Error::InvalidKappa(_)
        | Error::NotApplicable(_)
        | Error::Parse(_)
        | Error::Io(_) => EXIT_USAGE,
        Error::NoConvergence(_) => EXIT_FAILURE,
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Trace(a) => cmd_trace(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let opts = SolveOptions {
        output: if a.compact.is_some() {
            OutputForm::Compact
        } else {
            OutputForm::Dense
        },
        center: a.center,
        rank_tolerance: None,
    };
    let (approx, n, wall_ms) = if let Some(path) = &a.input {
        let x = read_data_csv(path)?;
        let algorithm = a.algorithm.map_or_else(
            || {
                if x.p() >= x.n() {
                    Algorithm::ModSvd
                } else {
                    Algorithm::FuSpt
                }
            },
            Algorithm::from,
        );
        let start = Instant::now();
        let approx = solve_data(&x, a.kappa, algorithm, &opts)?;
        (approx, Some(x.n()), start.elapsed())
    } else {
        let path = a
            .cov
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("need --input or --cov".into()))?;
        let s = read_matrix_market_file(path)?;
        let algorithm = a.algorithm.map_or(Algorithm::FuSpt, Algorithm::from);
        let start = Instant::now();
        let approx = solve_covariance(&s, a.kappa, algorithm, &opts)?;
        (approx, None, start.elapsed())
    };
    let record = ResultRecord::new(&approx, n, wall_ms.as_secs_f64() * 1e3);

    if let Some(path) = &a.dense {
        write_matrix_market_file(path, &approx.to_dense())?;
    }
    if let (Some(path), Some(c)) = (&a.compact, approx.compact()) {
        write_json(File::create(path)?, &CompactRecord::from(c))?;
    }
    write_json(output(a.result.as_deref())?, &record)
}

/// Expands `150,200` and `150..350:50` style size lists.
pub fn parse_p_list(items: &[String]) -> Result<Vec<usize>> {
    let bad = |s: &str| Error::InvalidInput(format!("bad size '{s}'"));
    let mut out = Vec::new();
    for item in items {
        let item = item.trim();
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = rest.split_once(':').unwrap_or((rest, "50"));
            let lo: usize = lo.parse().map_err(|_| bad(item))?;
            let hi: usize = hi.parse().map_err(|_| bad(item))?;
            let step: usize = step.parse().map_err(|_| bad(item))?;
            if step == 0 || hi < lo {
                return Err(bad(item));
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    Ok(out)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let config = BenchConfig {
        n: a.n,
        p_list: parse_p_list(&a.p_list)?,
        reps: a.reps,
        algorithms: a.algorithms.iter().map(|&x| x.into()).collect(),
        kappa: a.kappa,
        seed: RandomSeed(a.seed),
    };
    let rows = run_bench(&config)?;
    write_bench_csv(output(a.out.as_deref())?, &rows)
}

fn optional<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(writer: W, path: &TruncationPath) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "kappa",
        "alpha",
        "beta",
        "mu",
        "nu",
        "diffAlpha",
        "diffBeta",
        "kappaMu",
        "kappaNu",
        "inInterval",
    ])
    .map_err(csv_io)?;
    for i in 0..path.len() {
        let diff = |d: &[i64]| optional(i.checked_sub(1).map(|j| d[j]), |v| v.to_string());
        w.write_record([
            format_real(path.kappa_grid[i]),
            path.alpha_seq[i].to_string(),
            path.beta_seq[i].to_string(),
            format_real(path.mu_seq[i]),
            format_real(path.nu_seq[i]),
            diff(&path.diff_alpha),
            diff(&path.diff_beta),
            optional(path.kappa_mu[i], format_real),
            optional(path.kappa_nu[i], |v| {
                if v.is_infinite() {
                    "inf".into()
                } else {
                    format_real(v)
                }
            }),
            optional(path.in_interval[i], |b| b.to_string()),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_trace(a: &TraceArgs) -> Result<()> {
    let grid = kappa_grid(a.kappa_min, a.kappa_max, a.kappa_step)?;
    let spectrum = match &a.spectrum {
        Some(path) => EigenSpectrum::new(read_spectrum(File::open(path)?)?)?,
        None => {
            let (p, n) = (a.p.unwrap_or_default(), a.n.unwrap_or_default());
            let x = simulated_data(p, n, a.sigma_cond_exp, a.spacing.into(), RandomSeed(a.seed))?;
            let opts = SolveOptions {
                center: a.center,
                ..SolveOptions::default()
            };
            sample_spectrum(&x, &opts)?
        }
    };
    let path = trace_path(&spectrum, &grid)?;
    write_trace_csv(output(a.out.as_deref())?, &path)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let seed = RandomSeed(a.seed);
    let x = match a.sigma_cond_exp {
        Some(i) => simulated_data(a.p, a.n, i, a.spacing.into(), seed)?,
        None => gaussian_matrix(a.p, a.n, seed)?,
    };
    write_matrix_csv(output(a.out.as_deref())?, x.as_matrix())
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<()> {
    let mean = eigen_dispersion(a.p, a.n, a.reps, RandomSeed(a.seed))?;
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record(["index", "meanEigenvalue"]).map_err(csv_io)?;
    for (i, v) in mean.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format_real(*v)]).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}
