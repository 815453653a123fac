//! Command-line front end for `zonogini`.
//!
//! [`run`] parses arguments, executes one command and writes its report to
//! `out`. Failures are written to `err` as a single line of JSON and mapped
//! to the exit codes in [`exit`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use zonogini::stats::Summary;
use zonogini::{
    exact_volume, fast_volume_2d, gc_experiment, generalized_gini, gini_volume, hausdorff_estimate,
    lorenz_curve, mc_volume, mean_zonotope, read_csv_path, summarize, total_zonotope,
    ConvergenceTrace, EmpiricalMeasure, Error, GcOptions, GiniMethod, LorenzCurve,
    ReferenceDistribution, TraceSummary, VolumeResult, Zonotope,
};

pub const DEFAULT_SEED: u64 = 42;

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

const DIST_HELP: &str = "\
Distribution specs:
  exp:RATE               exponential with the given rate
  unif:A:B               uniform on [A, B], 0 <= A < B
  lognorm:M:S            lognormal with log-location M and log-scale S > 0
  dirac:V1,...,VD        point mass at (V1, ..., VD)
  lift:SPEC              law of (1, X) for a univariate SPEC
  prod:SPEC;SPEC;...     independent product of the factors

CSV input: one point per row, comma separated, non-negative finite values.

Exit codes: 0 success, 2 usage error, 3 data error, 4 combination guard
exceeded. Errors are reported as one line of JSON on stderr.";

#[derive(Debug, Parser)]
#[command(name = "zonogini", version, about = "Zonotope volumes and multidimensional Gini indices", after_help = DIST_HELP)]
pub struct Cli {
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true, env = "ZONOGINI_THREADS")]
    pub threads: Option<usize>,

    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gini volume of a dataset, or generalized Gini index of a distribution
    Gini(GiniArgs),
    /// Volume of a dataset's zonotope or a distribution's zonoid
    Volume(VolumeArgs),
    /// Lorenz curve nodes of a univariate dataset or distribution, as CSV
    Lorenz(LorenzArgs),
    /// Convergence experiment: sample Gini and Hausdorff traces against a reference
    Gc(GcArgs),
    /// Hausdorff lower bound between the mean zonotopes of two datasets
    Hausdorff(HausdorffArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// CSV dataset
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Reference distribution spec
    #[arg(long)]
    pub dist: Option<ReferenceDistribution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Fast2d,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZonotopeArg {
    /// sum of [0, y_n]
    Total,
    /// (1/N) sum of [0, y_n]
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GiniArgs {
    #[command(flatten)]
    pub source: Source,
    /// The CSV has a header row
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Monte Carlo tuples
    #[arg(long, default_value_t = 1_000_000)]
    pub tuples: usize,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum, default_value_t = ZonotopeArg::Total)]
    pub zonotope: ZonotopeArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub tuples: usize,
}

#[derive(Debug, Args)]
pub struct LorenzArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub header: bool,
    /// Number of grid intervals on [0, 1]
    #[arg(long, default_value_t = zonogini::gini::DEFAULT_LORENZ_GRID)]
    pub grid: usize,
    /// Emit the dual curve instead
    #[arg(long)]
    pub dual: bool,
}

#[derive(Debug, Args)]
pub struct GcArgs {
    #[arg(long)]
    pub dist: ReferenceDistribution,
    /// Strictly increasing sample sizes, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub schedule: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Directions per Hausdorff estimate; 0 skips the Hausdorff trace
    #[arg(long, default_value_t = 64)]
    pub hausdorff_budget: usize,
    /// Monte Carlo tuples for the reference Gini when no closed form exists
    #[arg(long, default_value_t = 1_000_000)]
    pub reference_tuples: usize,
    /// Reference zonotope size as a multiple of the largest sample size
    #[arg(long, default_value_t = 16)]
    pub reference_multiplier: usize,
    /// Monte Carlo tuples for samples too large to enumerate
    #[arg(long, default_value_t = 200_000)]
    pub fallback_tuples: usize,
    /// json: trace and summary; csv: one row per sample size
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the per-size CSV to this path
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HausdorffArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Number of support directions
    #[arg(long, default_value_t = 256)]
    pub budget: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Library(Error),
    Output(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Output(e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    row: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<u64>,
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => exit::USAGE,
            Failure::Library(Error::CombinationOverflow { .. }) => exit::RESOURCE,
            Failure::Library(
                Error::InvalidSchedule(_) | Error::InvalidParameter(_) | Error::OutOfRange(_),
            ) => exit::USAGE,
            Failure::Library(_) | Failure::Output(_) => exit::DATA,
        }
    }

    fn report(&self) -> ErrorReport<'static> {
        let (error, message) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Output(e) => ("io", e.to_string()),
            Failure::Library(e) => (error_kind(e), e.to_string()),
        };
        let (row, column) = match self {
            Failure::Library(Error::Parse { row, column, .. }) => (Some(*row), Some(*column)),
            _ => (None, None),
        };
        ErrorReport {
            error,
            message,
            row,
            column,
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::EmptyInput => "empty_input",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NegativeComponent { .. } => "negative_component",
        Error::NonFinite { .. } => "non_finite",
        Error::OutOfRange(_) => "out_of_range",
        Error::NotUnivariate(_) => "not_univariate",
        Error::NotTwoDimensional(_) => "not_two_dimensional",
        Error::CombinationOverflow { .. } => "combination_overflow",
        Error::DegenerateParallelotope { .. } => "degenerate_parallelotope",
        Error::DegenerateMean { .. } => "degenerate_mean",
        Error::ZeroMean => "zero_mean",
        Error::InvalidSchedule(_) => "invalid_schedule",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
    }
}

/// Runs one command. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{}", e.render());
            return exit::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let message = message
                .trim_start_matches("error: ")
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>();
            return fail(&Failure::Usage(message.join(" ")), err);
        }
    };
    match execute(cli, out) {
        Ok(()) => exit::SUCCESS,
        Err(f) => fail(&f, err),
    }
}

fn fail(failure: &Failure, err: &mut dyn Write) -> i32 {
    let line = serde_json::to_string(&failure.report()).expect("error report serializes");
    let _ = writeln!(err, "{line}");
    failure.exit_code()
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(threads);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let seed = cli.seed;
    let mut buffer = Vec::new();
    pool.install(|| match cli.command {
        Command::Gini(args) => gini(args, seed, &mut buffer),
        Command::Volume(args) => volume(args, seed, &mut buffer),
        Command::Lorenz(args) => lorenz(args, &mut buffer),
        Command::Gc(args) => gc(args, seed, &mut buffer),
        Command::Hausdorff(args) => hausdorff(args, seed, &mut buffer),
    })?;
    out.write_all(&buffer)?;
    out.flush()?;
    Ok(())
}

fn load(path: &Path, header: bool) -> Result<EmpiricalMeasure<f64>, Failure> {
    Ok(read_csv_path(path, header)?)
}

fn write_json<S: Serialize>(out: &mut dyn Write, value: &S) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn gini(args: GiniArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(dist) = &args.source.dist {
        if !matches!(args.method, MethodArg::Auto | MethodArg::Mc) {
            return Err(Failure::Usage(
                "a distribution only supports --method auto or mc".into(),
            ));
        }
        return write_json(out, &generalized_gini(dist, args.tuples, seed)?);
    }
    let mu = load(
        args.source
            .input
            .as_deref()
            .expect("clap enforces one source"),
        args.header,
    )?;
    let method = match args.method {
        MethodArg::Auto => GiniMethod::Auto,
        MethodArg::Exact => GiniMethod::Exact,
        MethodArg::Fast2d => GiniMethod::Fast2d,
        MethodArg::Mc => GiniMethod::MonteCarlo {
            tuples: args.tuples,
            seed,
        },
    };
    write_json(out, &gini_volume(&mu, method)?)
}

fn volume(args: VolumeArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(dist) = &args.source.dist {
        if !matches!(args.method, MethodArg::Auto | MethodArg::Mc) {
            return Err(Failure::Usage(
                "a distribution only supports --method auto or mc".into(),
            ));
        }
        return write_json(out, &mc_volume(dist, dist.dim(), args.tuples, seed)?);
    }
    let mu = load(
        args.source
            .input
            .as_deref()
            .expect("clap enforces one source"),
        args.header,
    )?;
    let z: Zonotope<f64> = match args.zonotope {
        ZonotopeArg::Total => total_zonotope(&mu),
        ZonotopeArg::Mean => mean_zonotope(&mu),
    };
    let result: VolumeResult<f64> = match args.method {
        MethodArg::Auto if mu.dim() == 2 => fast_volume_2d(&z)?,
        MethodArg::Auto | MethodArg::Exact => exact_volume(&z)?,
        MethodArg::Fast2d => fast_volume_2d(&z)?,
        MethodArg::Mc => {
            let mean = mc_volume(&mu, mu.dim(), args.tuples, seed)?;
            match args.zonotope {
                ZonotopeArg::Mean => mean,
                ZonotopeArg::Total => mean.scaled((mu.len() as f64).powi(mu.dim() as i32)),
            }
        }
    };
    write_json(out, &result)
}

fn write_curve(out: &mut dyn Write, curve: &LorenzCurve<f64>) -> Result<(), Failure> {
    let mut out = BufWriter::new(out);
    writeln!(out, "t,value")?;
    for (t, v) in &curve.nodes {
        writeln!(out, "{t},{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn lorenz(args: LorenzArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let curve = match (&args.source.dist, &args.source.input) {
        (Some(dist), _) => lorenz_curve(dist, args.grid)?,
        (None, Some(path)) => {
            zonogini::empirical_lorenz_curve(&load(path, args.header)?, args.grid)?
        }
        (None, None) => unreachable!("clap enforces one source"),
    };
    let curve = if args.dual { curve.dual() } else { curve };
    write_curve(out, &curve)
}

#[derive(Serialize)]
struct GcReport<'a> {
    trace: &'a ConvergenceTrace,
    summary: &'a TraceSummary,
}

fn summary_columns(s: Option<&Summary>) -> [String; 3] {
    match s {
        Some(s) => [
            s.mean.to_string(),
            s.median.to_string(),
            s.std_dev.to_string(),
        ],
        None => Default::default(),
    }
}

fn write_summary_csv(out: &mut dyn Write, summary: &TraceSummary) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(
        out,
        "n,defined,undefined,reference_gini,gini_mean,gini_median,gini_std,\
         abs_error_mean,abs_error_median,abs_error_std,hausdorff_mean,hausdorff_median,hausdorff_std"
    )?;
    for size in &summary.sizes {
        let columns = [&size.gini, &size.abs_error, &size.hausdorff]
            .map(|s| summary_columns(s.as_ref()).join(","));
        writeln!(
            out,
            "{},{},{},{},{}",
            size.n,
            size.defined,
            size.undefined,
            summary.reference_gini,
            columns.join(",")
        )?;
    }
    out.flush()
}

fn gc(args: GcArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let opts = GcOptions {
        hausdorff_budget: (args.hausdorff_budget > 0).then_some(args.hausdorff_budget),
        reference_tuples: args.reference_tuples,
        reference_multiplier: args.reference_multiplier,
        fallback_tuples: args.fallback_tuples,
    };
    let trace = gc_experiment(&args.dist, &args.schedule, args.trials, seed, &opts)?;
    let summary = summarize(&trace);
    if let Some(path) = &args.csv_out {
        let mut file =
            File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_summary_csv(&mut file, &summary)?;
    }
    match args.format {
        Format::Json => write_json(
            out,
            &GcReport {
                trace: &trace,
                summary: &summary,
            },
        ),
        Format::Csv => Ok(write_summary_csv(out, &summary)?),
    }
}

#[derive(Serialize)]
struct HausdorffReport {
    lower_bound: f64,
    directions_used: usize,
    dim: usize,
    n_a: usize,
    n_b: usize,
}

fn hausdorff(args: HausdorffArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let a = load(&args.a, args.header)?;
    let b = load(&args.b, args.header)?;
    let estimate = hausdorff_estimate(&mean_zonotope(&a), &mean_zonotope(&b), args.budget, seed)?;
    write_json(
        out,
        &HausdorffReport {
            lower_bound: estimate.lower_bound,
            directions_used: estimate.directions_used,
            dim: a.dim(),
            n_a: a.len(),
            n_b: b.len(),
        },
    )
}
