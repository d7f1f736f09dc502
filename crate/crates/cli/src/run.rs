//! Experiment runners. Each writes its CSV files plus a manifest per file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use qperc_core::boolean::{generate_target_suite, parity, BooleanFunction, TargetSuite};
use qperc_core::encode::EncodedDataset;
use qperc_core::express::{is_expressible, suite_verdicts, verdicts_to_csv};
use qperc_core::ingest::{build_qfashion, ImageDataset};
use qperc_core::kernel::{
    curve_to_csv, integral_operator_spectrum, learning_curve, linear_kernel, quantum_fcn_kernel, quantum_kernel,
    spectrum_to_csv, task_model_alignment, KernelMatrix,
};
use qperc_core::learn::dqnn::{construct_universal_dqnn, dqnn_forward, DqnnVariant};
use qperc_core::learn::{evaluate_qfashion, records_to_csv, scores_to_csv, train_suite, ModelSpec, TrainConfig};
use qperc_core::num::fixed;
use qperc_core::prior::{prior_by_complexity, rank_plot, sample_prior};

use crate::config::{Experiment, ExperimentConfig};
use crate::report;

/// Failure classes, mapped to process exit codes by `main`.
#[derive(Debug)]
pub enum RunError {
    Invalid(String),
    MissingInput(String),
    Internal(anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) => 2,
            RunError::MissingInput(_) => 3,
            RunError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Invalid(m) => write!(f, "invalid configuration: {m}"),
            RunError::MissingInput(m) => write!(f, "missing input: {m}"),
            RunError::Internal(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Internal(e)
    }
}

impl From<qperc_core::Error> for RunError {
    fn from(e: qperc_core::Error) -> Self {
        RunError::Internal(e.into())
    }
}

pub type RunResult<T> = Result<T, RunError>;

/// Writes artifacts and their manifests into one output directory.
pub struct Writer<'a> {
    config: &'a ExperimentConfig,
    pub written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(config: &'a ExperimentConfig) -> RunResult<Self> {
        fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
        Ok(Self { config, written: Vec::new() })
    }

    /// `name` plus `name.manifest` holding the config hash, seed and version.
    pub fn write(&mut self, name: &str, body: &str) -> RunResult<()> {
        let path = self.config.out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let mut manifest = format!(
            "tool = qperc\nversion = {}\nexperiment = {}\nartifact = {name}\nconfig_hash = {}\nseed = {}\ncreated_unix = {created}\n",
            env!("CARGO_PKG_VERSION"),
            self.config.experiment,
            self.config.hash(),
            self.config.seed,
        );
        manifest.push_str("[config]\n");
        manifest.push_str(&self.config.canonical());
        let mpath = self.config.out.join(format!("{name}.manifest"));
        fs::write(&mpath, manifest).with_context(|| format!("writing {}", mpath.display()))?;
        self.written.push(path);
        Ok(())
    }
}

pub fn run(config: &ExperimentConfig) -> RunResult<Vec<PathBuf>> {
    let mut out = Writer::new(config)?;
    match config.experiment {
        Experiment::Express => express(config, &mut out)?,
        Experiment::TrainSuite => train(config, &mut out)?,
        Experiment::Prior => prior(config, &mut out)?,
        Experiment::KernelSpectrum => spectrum(config, &mut out)?,
        Experiment::LearningCurve => curve(config, &mut out)?,
        Experiment::Qfashion => qfashion(config, &mut out)?,
        Experiment::Dqnn => dqnn(config, &mut out)?,
        Experiment::Report => report::run(config, &mut out)?,
    }
    Ok(out.written)
}

fn suite(config: &ExperimentConfig) -> TargetSuite {
    generate_target_suite(config.n, config.suite_seed)
}

fn dataset(config: &ExperimentConfig) -> RunResult<EncodedDataset> {
    Ok(EncodedDataset::boolean(config.encoding, config.n)?)
}

fn express(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let ds = dataset(config)?;
    let bias = config.bias.unwrap_or(config.encoding.is_classical());
    let rows = suite_verdicts(&suite(config), |f| is_expressible(&ds, f, bias))?;
    out.write("express.csv", &verdicts_to_csv(&rows))
}

fn train(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let model = config.model.ok_or_else(|| RunError::Invalid("train-suite needs a model".into()))?;
    run_suite(config, model, "train-suite.csv", out)
}

fn run_suite(config: &ExperimentConfig, model: ModelSpec, name: &str, out: &mut Writer) -> RunResult<()> {
    let ds = dataset(config)?;
    if config.m > ds.len() {
        return Err(RunError::Invalid(format!("m = {} exceeds the {} encodable inputs", config.m, ds.len())));
    }
    let cfg = TrainConfig::default()
        .with_learning_rate(config.learning_rate_for(model))
        .with_epochs(config.epochs)
        .with_batch_fraction(config.batch_fraction);
    let seeds: Vec<u64> = (0..config.seeds as u64).map(|s| config.seed + s).collect();
    let records = train_suite(&ds, &suite(config), model, config.m, &seeds, &cfg)?;
    out.write(name, &records_to_csv(&records))
}

fn prior(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let ds = dataset(config)?;
    let hist = sample_prior(&ds, config.samples, config.seed)?;
    out.write("prior.hist", &hist.to_text())?;
    let mut ranks = String::from("rank,probability\n");
    for (r, p) in rank_plot(&hist)? {
        ranks.push_str(&format!("{r},{}\n", fixed(p)));
    }
    out.write("prior-rank.csv", &ranks)?;
    let mut bins = String::from("lz,probability\n");
    for (lz, p) in prior_by_complexity(&hist) {
        bins.push_str(&format!("{},{}\n", fixed(lz), fixed(p)));
    }
    out.write("prior-lz.csv", &bins)
}

/// `parity`, `alternating` (0101...), `suite:<index>` or a literal bit string.
fn target(config: &ExperimentConfig) -> RunResult<BooleanFunction> {
    let n = config.n;
    let f = match config.target.as_str() {
        "parity" => parity(n),
        "alternating" => BooleanFunction::from_fn(n, |i| i % 2 == 1),
        t => {
            if let Some(idx) = t.strip_prefix("suite:") {
                let i: usize = idx.parse().map_err(|_| RunError::Invalid(format!("bad suite index {idx:?}")))?;
                let s = suite(config);
                s.entries
                    .get(i)
                    .map(|e| e.function.clone())
                    .ok_or_else(|| RunError::Invalid(format!("suite has {} functions", s.len())))?
            } else {
                t.parse::<BooleanFunction>().map_err(|e| RunError::Invalid(e.to_string()))?
            }
        }
    };
    if f.n() != n {
        return Err(RunError::Invalid(format!("target has {} inputs, expected {}", f.len(), 1 << n)));
    }
    Ok(f)
}

fn kernel(config: &ExperimentConfig, ds: &EncodedDataset) -> RunResult<KernelMatrix> {
    Ok(match ds.states() {
        Some(states) if config.layers > 0 => quantum_fcn_kernel(&states, config.layers)?,
        Some(states) => quantum_kernel(&states)?,
        None => linear_kernel(&ds.linear_features())?,
    })
}

fn signed_target(f: &BooleanFunction, ds: &EncodedDataset) -> Vec<f64> {
    ds.indices.iter().map(|&i| f.sign(i)).collect()
}

fn spectrum(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let ds = dataset(config)?;
    let s = integral_operator_spectrum(&kernel(config, &ds)?);
    let ta = task_model_alignment(&s, &signed_target(&target(config)?, &ds))?;
    out.write("kernel-spectrum.csv", &spectrum_to_csv(&s, &ta))
}

fn curve(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let ds = dataset(config)?;
    if let Some(&m) = config.sizes.iter().find(|&&m| m == 0 || m > ds.len()) {
        return Err(RunError::Invalid(format!("training size {m} outside 1..={}", ds.len())));
    }
    let k = kernel(config, &ds)?;
    let points = learning_curve(&k, &signed_target(&target(config)?, &ds), &config.sizes, config.trials, config.seed)?;
    out.write("learning-curve.csv", &curve_to_csv(&points))
}

fn qfashion(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    for p in [&config.images, &config.labels] {
        if !p.exists() {
            return Err(RunError::MissingInput(p.display().to_string()));
        }
    }
    let raw = ImageDataset::load(&config.images, &config.labels)?;
    let data = build_qfashion(&raw, (0, 3), (config.train, config.test), config.seed)?;
    out.write("qfashion-data.csv", &data.to_csv())?;
    out.write("qfashion-projections.csv", &data.projections_csv())?;
    out.write("qfashion-scores.csv", &scores_to_csv(&evaluate_qfashion(&data, config.seed)?))
}

fn dqnn(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let variants: Vec<DqnnVariant> = match config.model {
        Some(ModelSpec::Dqnn { variant, .. }) => vec![variant],
        Some(other) => return Err(RunError::Invalid(format!("dqnn cannot run model {other}"))),
        None => vec![DqnnVariant::Alpha, DqnnVariant::Beta],
    };
    if config.universal {
        return universal(config, &variants, out);
    }
    for variant in variants {
        let readouts = config.readouts.unwrap_or(match variant {
            DqnnVariant::Alpha => 64,
            DqnnVariant::Beta => config.n,
        });
        let model = ModelSpec::Dqnn { variant, readouts };
        run_suite(config, model, &format!("dqnn-{variant}.csv"), out)?;
    }
    Ok(())
}

/// Check the explicit construction on every function (n <= 3) or the suite.
fn universal(config: &ExperimentConfig, variants: &[DqnnVariant], out: &mut Writer) -> RunResult<()> {
    let ds = dataset(config)?;
    let states = ds.states().ok_or_else(|| RunError::Invalid("universal check needs amplitude states".into()))?;
    let functions: Vec<BooleanFunction> = if config.n <= 3 {
        let len = 1usize << config.n;
        (0..1u64 << len).map(|code| BooleanFunction::from_fn(config.n, |i| (code >> i) & 1 == 1)).collect()
    } else {
        suite(config).entries.into_iter().map(|e| e.function).collect()
    };
    let mut csv = String::from("function,variant,inputs,mismatches\n");
    for f in &functions {
        for &variant in variants {
            let model = construct_universal_dqnn(f, variant)?;
            let mut wrong = 0;
            for (s, &i) in states.iter().zip(&ds.indices) {
                if (dqnn_forward(&model, s)? > 0.0) != f.label(i) {
                    wrong += 1;
                }
            }
            csv.push_str(&format!("{f},{variant},{},{wrong}\n", ds.indices.len()));
        }
    }
    out.write("dqnn-universal.csv", &csv)
}

/// Read a file, reporting absence as a missing input.
pub fn read_input(path: &Path) -> RunResult<String> {
    if !path.exists() {
        return Err(RunError::MissingInput(path.display().to_string()));
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(RunError::from)
}
