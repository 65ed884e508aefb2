//! `tcm`: transductive prediction with confidence from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tcm_core::data::{
    generate_synthetic, load_examples, load_points, save_examples, split_dataset, write_examples,
    CsvSchema, LabelColumn, SynthConfig,
};
use tcm_core::eval::{
    calibration_experiment, evaluate_testset, predict_points, read_point_file, validate_measure,
    write_calibration, write_points, write_scatter, write_validity, Predictor,
};
use tcm_core::{Error, ErrorCategory, Kernel, MeasureConfig, MeasureKind, SolverConfig};

#[derive(Parser)]
#[command(name = "tcm", version, about = "Transductive confidence machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict every point of a test file and write one CSV row per point.
    Transduce(TransduceArgs),
    /// Predict a labeled test set and report errors, undecided points and
    /// possibility clusters.
    Evaluate(EvaluateArgs),
    /// Leave-one-out calibration on synthetic data.
    Calibrate(CalibrateArgs),
    /// Average a measure over all orderings of random samples.
    Validate(ValidateArgs),
    /// Convert a per-point file into (confidence, possibility, outcome) rows.
    Scatter(ScatterArgs),
    /// Write a synthetic two-cloud dataset, optionally split into train and test.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelName {
    Linear,
    Poly,
    Rbf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictorName {
    Transductive,
    Svm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelName,
    /// Polynomial degree.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Polynomial offset.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    coef0: f64,
    /// RBF width: `exp(−gamma |x − x'|²)`.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Slack penalty.
    #[arg(long = "C", visible_alias = "c", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-6)]
    sv_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    kkt_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// `sv-count`, `weighted:<f>` or `multi:<k>:<f>` with
    /// `<f>` one of `sign`, `identity`, `power(q)`.
    #[arg(long, default_value = "sv-count", value_parser = parse_measure)]
    measure: MeasureKind,
}

impl ModelArgs {
    fn config(&self) -> MeasureConfig {
        let kernel = match self.kernel {
            KernelName::Linear => Kernel::Linear,
            KernelName::Poly => Kernel::Polynomial {
                degree: self.degree,
                coef0: self.coef0,
            },
            KernelName::Rbf => Kernel::Rbf { gamma: self.gamma },
        };
        let solver = SolverConfig {
            c: self.c,
            kkt_tolerance: self.kkt_tol,
            sv_tolerance: self.sv_tol,
            max_iterations: self.max_iter,
        };
        MeasureConfig::new(self.measure, kernel, solver)
    }
}

fn parse_measure(s: &str) -> Result<MeasureKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct CsvArgs {
    /// Label column: `last`, a zero-based index, or a header name.
    #[arg(long, default_value = "last")]
    label_col: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pos_label: String,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    neg_label: String,
}

impl CsvArgs {
    fn schema(&self) -> CsvSchema {
        let label_column = match self.label_col.as_str() {
            "last" => LabelColumn::Last,
            s => s
                .parse()
                .map(LabelColumn::Index)
                .unwrap_or_else(|_| LabelColumn::Name(s.to_owned())),
        };
        CsvSchema {
            label_column,
            positive_token: self.pos_label.clone(),
            negative_token: self.neg_label.clone(),
        }
    }
}

#[derive(Args)]
struct TransduceArgs {
    #[arg(long)]
    train: PathBuf,
    /// Test points, with or without a label column.
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    csv: CsvArgs,
    #[arg(long, value_enum, default_value = "transductive")]
    predictor: PredictorName,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    train: PathBuf,
    /// Labeled test points.
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    csv: CsvArgs,
    #[arg(long, value_enum, default_value = "transductive")]
    predictor: PredictorName,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Report file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-point rows here.
    #[arg(long)]
    points_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    n_per_class: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Distance between the two class means.
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    /// Standard deviation of each cloud.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
}

impl SynthArgs {
    fn config(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            n_per_class: self.n_per_class,
            dimension: self.dim,
            separation: self.separation,
            noise: self.noise,
            seed,
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    /// Comma-separated significance levels.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Sample size, at most 7.
    #[arg(long, default_value_t = 5)]
    size: usize,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScatterArgs {
    /// Per-point file written by `transduce` or `evaluate --points-out`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Whole dataset, or the training part when `--test-out` is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a test part here, splitting with `--train-fraction`.
    #[arg(long, requires = "out")]
    test_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn predictor(name: PredictorName) -> Predictor {
    match name {
        PredictorName::Transductive => Predictor::Transductive,
        PredictorName::Svm => Predictor::Svm,
    }
}

fn transduce(args: &TransduceArgs) -> Result<(), Error> {
    let config = args.model.config();
    config.validate()?;
    let schema = args.csv.schema();
    let train = load_examples(&args.train, &schema)?;
    let dim = train.dim().ok_or(Error::EmptyInput)?;
    let test = load_points(&args.test, &schema, dim)?;
    let points = predict_points(&train, &test, &config, predictor(args.predictor))?;
    write_points(&points, output(args.out.as_deref())?)
}

fn evaluate(args: &EvaluateArgs) -> Result<(), Error> {
    let config = args.model.config();
    config.validate()?;
    let schema = args.csv.schema();
    let train = load_examples(&args.train, &schema)?;
    let test = load_examples(&args.test, &schema)?;
    let evaluation = evaluate_testset(&train, &test, &config, predictor(args.predictor))?;
    if let Some(path) = &args.points_out {
        write_points(&evaluation.points, output(Some(path))?)?;
    }
    let report = match args.format {
        Format::Text => evaluation.report.to_text(),
        Format::Csv => evaluation.report.to_csv(),
    };
    let mut out = output(args.out.as_deref())?;
    out.write_all(report.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn calibrate(args: &CalibrateArgs) -> Result<(), Error> {
    let config = args.model.config();
    if let Some(e) = args.epsilons.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::InvalidConfig(format!("epsilon {e} outside (0, 1]")));
    }
    let rows = calibration_experiment(
        &args.synth.config(0),
        &args.epsilons,
        args.trials,
        args.seed,
        &config,
    )?;
    write_calibration(&rows, output(args.out.as_deref())?)
}

fn validate(args: &ValidateArgs) -> Result<(), Error> {
    let config = args.model.config();
    let rows = validate_measure(&config, args.size, args.samples, args.dim, args.seed)?;
    let worst = rows
        .iter()
        .flat_map(|r| [r.permutation_average, r.exchangeable_average])
        .map(|a| (a - 1.0).abs())
        .fold(0.0, f64::max);
    write_validity(&rows, output(args.out.as_deref())?)?;
    eprintln!("{}: largest deviation from 1 is {worst:.3e}", config.kind);
    Ok(())
}

fn scatter(args: &ScatterArgs) -> Result<(), Error> {
    let rows = read_point_file(&args.input)?;
    write_scatter(&rows, output(args.out.as_deref())?)
}

fn generate(args: &GenerateArgs) -> Result<(), Error> {
    let dataset = generate_synthetic(&args.synth.config(args.seed))?;
    let schema = CsvSchema::default();
    match (&args.out, &args.test_out) {
        (Some(train_path), Some(test_path)) => {
            let (train, test) = split_dataset(&dataset, args.train_fraction, args.seed)?;
            save_examples(&train, &schema, train_path)?;
            save_examples(&test, &schema, test_path)
        }
        (Some(path), None) => save_examples(&dataset, &schema, path),
        (None, _) => write_examples(&dataset, &schema, output(None)?),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Transduce(a) => transduce(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Validate(a) => validate(a),
        Command::Scatter(a) => scatter(a),
        Command::Generate(a) => generate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Usage => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numerical => 3,
            })
        }
    }
}
