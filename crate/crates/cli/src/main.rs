mod config;
mod report;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_pairs, Experiment, ExperimentConfig};
use run::{read_input, RunError};

#[derive(Parser)]
#[command(name = "qperc", version, about = "Reproduce single-readout quantum classifier experiments as CSV files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Expressibility verdicts for every suite function.
    Express,
    /// Train one model on every suite function for several seeds.
    TrainSuite,
    /// Sample the Haar-random QNN prior over Boolean functions.
    Prior,
    /// Integral operator spectrum and task-model alignment of a kernel.
    KernelSpectrum,
    /// Ridgeless regression generalisation loss against training size.
    LearningCurve,
    /// Build the two-class FashionMNIST reduction and compare models on it.
    Qfashion,
    /// Train layered QNNs on the suite, or check the explicit constructions.
    Dqnn,
    /// Summarise record, verdict and histogram files.
    Report { inputs: Vec<PathBuf> },
    /// Run the experiment named in a config file.
    Run,
}

#[derive(Args)]
struct Flags {
    /// Config file of `namespace.key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    encoding: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    /// Training set size.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Number of seeds, starting at --seed.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Target suite seed; defaults to --seed.
    #[arg(long, global = true)]
    suite_seed: Option<u64>,
    /// parity, alternating, suite:<index> or a bit string.
    #[arg(long, global = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    batch_fraction: Option<f64>,
    #[arg(long, global = true)]
    width: Option<usize>,
    #[arg(long, global = true)]
    readouts: Option<usize>,
    /// Allow a free threshold in expressibility checks.
    #[arg(long, global = true)]
    bias: Option<bool>,
    /// Layers of the hybrid FCN kernel; 0 uses the plain kernel.
    #[arg(long, global = true)]
    layers: Option<usize>,
    /// `8,16,32` or `start:end:step`.
    #[arg(long, global = true)]
    sizes: Option<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    images: Option<PathBuf>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Check the explicit universal constructions instead of training.
    #[arg(long, global = true)]
    universal: bool,
    /// Also emit SVG plots from `report`.
    #[arg(long, global = true)]
    svg: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        let s = |v: &Option<String>| v.clone();
        vec![
            ("boolean.n", self.n.map(|v| v.to_string())),
            ("encode.encoding", s(&self.encoding)),
            ("learn.model", s(&self.model)),
            ("learn.m", self.m.map(|v| v.to_string())),
            ("learn.seeds", self.seeds.map(|v| v.to_string())),
            ("run.seed", self.seed.map(|v| v.to_string())),
            ("boolean.suite_seed", self.suite_seed.map(|v| v.to_string())),
            ("boolean.target", s(&self.target)),
            ("prior.samples", self.samples.map(|v| v.to_string())),
            ("run.out", self.out.as_ref().map(|p| p.display().to_string())),
            ("run.workers", self.workers.map(|v| v.to_string())),
            ("learn.learning_rate", self.learning_rate.map(|v| v.to_string())),
            ("learn.epochs", self.epochs.map(|v| v.to_string())),
            ("learn.batch_fraction", self.batch_fraction.map(|v| v.to_string())),
            ("learn.width", self.width.map(|v| v.to_string())),
            ("learn.readouts", self.readouts.map(|v| v.to_string())),
            ("express.bias", self.bias.map(|v| v.to_string())),
            ("kernel.layers", self.layers.map(|v| v.to_string())),
            ("kernel.sizes", s(&self.sizes)),
            ("kernel.trials", self.trials.map(|v| v.to_string())),
            ("ingest.images", self.images.as_ref().map(|p| p.display().to_string())),
            ("ingest.labels", self.labels.as_ref().map(|p| p.display().to_string())),
            ("dqnn.universal", self.universal.then(|| "true".to_string())),
            ("report.svg", self.svg.then(|| "true".to_string())),
        ]
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut pairs: BTreeMap<String, String> = match &cli.flags.config {
        Some(path) => parse_pairs(&read_input(path)?).map_err(RunError::Invalid)?,
        None => BTreeMap::new(),
    };
    for (key, value) in cli.flags.pairs() {
        if let Some(v) = value {
            pairs.insert(key.to_string(), v);
        }
    }
    let experiment = match &cli.command {
        Command::Express => Some(Experiment::Express),
        Command::TrainSuite => Some(Experiment::TrainSuite),
        Command::Prior => Some(Experiment::Prior),
        Command::KernelSpectrum => Some(Experiment::KernelSpectrum),
        Command::LearningCurve => Some(Experiment::LearningCurve),
        Command::Qfashion => Some(Experiment::Qfashion),
        Command::Dqnn => Some(Experiment::Dqnn),
        Command::Report { inputs } => {
            if !inputs.is_empty() {
                let joined: Vec<String> = inputs.iter().map(|p| p.display().to_string()).collect();
                pairs.insert("report.inputs".into(), joined.join(","));
            }
            Some(Experiment::Report)
        }
        Command::Run => None,
    };
    if let Some(e) = experiment {
        if let Some(named) = pairs.get("run.experiment") {
            if named != e.name() {
                return Err(RunError::Invalid(format!("config names experiment {named:?} but {e} was requested")));
            }
        }
        pairs.insert("run.experiment".into(), e.name().into());
    }
    ExperimentConfig::from_pairs(pairs).map_err(RunError::Invalid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|config| {
        if let Some(w) = config.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .map_err(|e| RunError::Internal(anyhow::anyhow!("worker pool: {e}")))?;
        }
        run::run(&config)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qperc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
