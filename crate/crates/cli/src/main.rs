//! `spca`: run sparse PCA evaluation grids from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_pca::bench::{
    extract_for_dataset, load_dataset, parse_report_csv, run_pipeline, ClassifierKind,
    DatasetSource, ExperimentConfig, ReportFormat,
};
use sparse_pca::classify::KernelKind;
use sparse_pca::data::{synth_dataset, write_csv, SynthParams};
use sparse_pca::solvers::Method;

#[derive(Parser)]
#[command(
    name = "spca",
    version,
    about = "Sparse PCA by damped leapfrog dynamics, with PCA/ISTA baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the (method x d x classifier) evaluation grid.
    Run(RunArgs),
    /// Write a synthetic labeled dataset as train/test CSV files.
    Synth(SynthArgs),
    /// Fit components on the training data and write the loadings as CSV.
    Extract(ExtractArgs),
    /// Re-render a saved CSV report.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Pgm,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Markdown,
}

impl From<OutputFormat> for ReportFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => ReportFormat::Csv,
            OutputFormat::Markdown => ReportFormat::Markdown,
        }
    }
}

/// Dataset selection shared by `run` and `extract`.
///
/// PGM directories hold files named `<label>_<anything>.pgm`; every image
/// must have the same size and is flattened row by row.
#[derive(Args)]
struct DataArgs {
    /// Training data: a labeled CSV file or a PGM directory.
    #[arg(long, requires = "test")]
    train: Option<PathBuf>,
    /// Test data, same kind as --train.
    #[arg(long, requires = "train")]
    test: Option<PathBuf>,
    /// How to read --train/--test.
    #[arg(long, value_enum, default_value = "csv")]
    format: DataFormat,
}

impl DataArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let (Some(train), Some(test)) = (&self.train, &self.test) {
            let (train, test) = (train.clone(), test.clone());
            config.dataset = match self.format {
                DataFormat::Csv => DatasetSource::Csv { train, test },
                DataFormat::Pgm => DatasetSource::Pgm { train, test },
            };
        }
    }
}

/// Solver flags shared by `run` and `extract`.
#[derive(Args)]
struct SolverArgs {
    /// L1 weight; defaults to 0.1 x mean variance of the training data.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Leapfrog step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Leapfrog momentum damping in (0, 1].
    #[arg(long)]
    damping: Option<f64>,
    /// ISTA step size; defaults to 0.9 / (2 x spectral radius).
    #[arg(long)]
    ista_step: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    x_tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Power-iteration cap for the PCA baseline.
    #[arg(long)]
    pca_max_iter: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        let s = &mut config.solver;
        if self.lambda.is_some() {
            s.lambda = self.lambda;
        }
        if self.ista_step.is_some() {
            s.ista_step = self.ista_step;
        }
        s.delta = self.delta.unwrap_or(s.delta);
        s.dt = self.dt.unwrap_or(s.dt);
        s.damping = self.damping.unwrap_or(s.damping);
        s.max_iter = self.max_iter.unwrap_or(s.max_iter);
        s.x_tol = self.x_tol.unwrap_or(s.x_tol);
        s.restarts = self.restarts.unwrap_or(s.restarts);
        s.pca_max_iter = self.pca_max_iter.unwrap_or(s.pca_max_iter);
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed (required unless the config file sets one).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated subset of pca,ista,leapfrog.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Comma-separated component counts.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Comma-separated subset of knn,krr.
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<ClassifierKind>>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    k_neighbors: Option<usize>,
    /// KRR kernel: rbf or linear.
    #[arg(long)]
    kernel: Option<KernelKind>,
    /// RBF bandwidth; defaults to the median pairwise training distance.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    ridge: Option<f64>,
    /// CSV report path (stdout if neither this nor --markdown is set).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Markdown report path.
    #[arg(long)]
    markdown: Option<PathBuf>,
    /// Leave the seconds column empty so reports are byte-reproducible.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Training CSV to write.
    #[arg(long)]
    train: PathBuf,
    /// Test CSV to write.
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    per_class_train: Option<usize>,
    #[arg(long)]
    per_class_test: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Nonzero coordinates per class mean.
    #[arg(long)]
    support: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    data: DataArgs,
    /// TOML experiment file supplying the dataset and solver settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "leapfrog")]
    method: Method,
    /// Number of components.
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Loadings CSV: one row per feature, one column per component.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// CSV report written by `run`.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "markdown")]
    format: OutputFormat,
    /// Destination (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    args.data.apply(&mut config);
    if let Some(m) = args.methods {
        config.methods = m;
    }
    if let Some(d) = args.dims {
        config.dims = d;
    }
    if let Some(c) = args.classifiers {
        config.classifiers = c;
    }
    args.solver.apply(&mut config);
    let c = &mut config.classifier;
    c.k_neighbors = args.k_neighbors.unwrap_or(c.k_neighbors);
    c.kernel = args.kernel.unwrap_or(c.kernel);
    if args.bandwidth.is_some() {
        c.bandwidth = args.bandwidth;
    }
    c.ridge = args.ridge.unwrap_or(c.ridge);
    if args.output.is_some() {
        config.output = args.output;
    }
    if args.markdown.is_some() {
        config.markdown = args.markdown;
    }
    if args.no_timings {
        config.timings = false;
    }

    let report = run_pipeline(&config)?;
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    if config.output.is_none() && config.markdown.is_none() {
        print!("{}", report.render(ReportFormat::Csv)?);
    }
    if let Some(path) = &config.output {
        report.emit(ReportFormat::Csv, path)?;
    }
    if let Some(path) = &config.markdown {
        report.emit(ReportFormat::Markdown, path)?;
    }
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", report.rows.len());
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let base = SynthParams::default();
    let params = SynthParams {
        classes: args.classes.unwrap_or(base.classes),
        per_class_train: args.per_class_train.unwrap_or(base.per_class_train),
        per_class_test: args.per_class_test.unwrap_or(base.per_class_test),
        dim: args.dim.unwrap_or(base.dim),
        support: args.support.unwrap_or(base.support),
        noise_sigma: args.noise_sigma.unwrap_or(base.noise_sigma),
        seed: args.seed.unwrap_or(base.seed),
    };
    let pair = synth_dataset(&params)?;
    write_csv(&pair.train, &args.train)?;
    write_csv(&pair.test, &args.test)?;
    Ok(())
}

fn extract(args: ExtractArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    args.data.apply(&mut config);
    args.solver.apply(&mut config);
    let pair = load_dataset(&config.dataset)?;
    let loadings = extract_for_dataset(&pair, &config, args.method, args.k)?;
    let mut out = String::new();
    for row in loadings.matrix().rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(",")).expect("writing to a String");
    }
    fs::write(&args.output, out).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let report = parse_report_csv(&text)?;
    if report.rows.is_empty() {
        bail!("{} contains no report rows", args.input.display());
    }
    match &args.output {
        Some(path) => report.emit(args.format.into(), path)?,
        None => print!("{}", report.render(args.format.into())?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
