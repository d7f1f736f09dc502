//! Experiment configuration: a flat `namespace.key = value` text format that
//! command-line flags are merged into.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qperc_core::encode::Encoding;
use qperc_core::learn::ModelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Express,
    TrainSuite,
    Prior,
    KernelSpectrum,
    LearningCurve,
    Qfashion,
    Dqnn,
    Report,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Express => "express",
            Experiment::TrainSuite => "train-suite",
            Experiment::Prior => "prior",
            Experiment::KernelSpectrum => "kernel-spectrum",
            Experiment::LearningCurve => "learning-curve",
            Experiment::Qfashion => "qfashion",
            Experiment::Dqnn => "dqnn",
            Experiment::Report => "report",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "express" => Experiment::Express,
            "train-suite" => Experiment::TrainSuite,
            "prior" => Experiment::Prior,
            "kernel-spectrum" => Experiment::KernelSpectrum,
            "learning-curve" => Experiment::LearningCurve,
            "qfashion" => Experiment::Qfashion,
            "dqnn" => Experiment::Dqnn,
            "report" => Experiment::Report,
            other => return Err(format!("unknown experiment {other:?}")),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every key the format accepts.
pub const KEYS: &[&str] = &[
    "run.experiment",
    "run.seed",
    "run.out",
    "run.workers",
    "boolean.n",
    "boolean.suite_seed",
    "boolean.target",
    "encode.encoding",
    "express.bias",
    "learn.model",
    "learn.m",
    "learn.seeds",
    "learn.learning_rate",
    "learn.epochs",
    "learn.batch_fraction",
    "learn.width",
    "learn.readouts",
    "dqnn.universal",
    "prior.samples",
    "kernel.layers",
    "kernel.sizes",
    "kernel.trials",
    "ingest.images",
    "ingest.labels",
    "ingest.train",
    "ingest.test",
    "report.inputs",
    "report.svg",
];

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub n: usize,
    pub suite_seed: u64,
    pub target: String,
    pub encoding: Encoding,
    pub bias: Option<bool>,
    pub model: Option<ModelSpec>,
    pub m: usize,
    pub seeds: usize,
    pub learning_rate: Option<f64>,
    pub epochs: usize,
    pub batch_fraction: f64,
    pub width: Option<usize>,
    pub readouts: Option<usize>,
    pub universal: bool,
    pub samples: u64,
    pub layers: usize,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub images: PathBuf,
    pub labels: PathBuf,
    pub train: usize,
    pub test: usize,
    pub inputs: Vec<PathBuf>,
    pub svg: bool,
    /// The resolved key-value pairs, used for hashing and manifests.
    pub entries: BTreeMap<String, String>,
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut pairs = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = k.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key {key:?}", no + 1));
        }
        if pairs.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key {key:?}", no + 1));
        }
    }
    Ok(pairs)
}

fn parse<T: FromStr>(pairs: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, String> {
    pairs.get(key).map(|v| v.parse().map_err(|_| format!("{key}: cannot parse {v:?}"))).transpose()
}

/// `8,16,32` or an inclusive range `start:end:step`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("kernel.sizes: cannot parse {s:?}");
    if let Some((a, rest)) = s.split_once(':') {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let (a, b, step): (usize, usize, usize) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if step == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).step_by(step).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

impl ExperimentConfig {
    /// Validate the merged pairs and fill defaults.
    pub fn from_pairs(mut pairs: BTreeMap<String, String>) -> Result<Self, String> {
        if let Some(bad) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(format!("unknown key {bad:?}"));
        }
        let experiment: Experiment = parse(&pairs, "run.experiment")?.ok_or("run.experiment is required")?;
        let n: usize = parse(&pairs, "boolean.n")?.unwrap_or(7);
        if !(1..=10).contains(&n) {
            return Err(format!("boolean.n must be in 1..=10, got {n}"));
        }
        let seed: u64 = parse(&pairs, "run.seed")?.unwrap_or(0);
        let encoding_name: String = parse(&pairs, "encode.encoding")?.unwrap_or_else(|| "amplitude01".into());
        let encoding = encoding_name.parse::<Encoding>().map_err(|e| e.to_string())?.with_seed(seed);
        let model: Option<ModelSpec> =
            pairs.get("learn.model").map(|v| v.parse::<ModelSpec>().map_err(|e| e.to_string())).transpose()?;
        let width: Option<usize> = parse(&pairs, "learn.width")?;
        let readouts: Option<usize> = parse(&pairs, "learn.readouts")?;
        let model = model.map(|m| match m {
            ModelSpec::Fcn { .. } => ModelSpec::Fcn { width: width.or(Some(1 << n)) },
            ModelSpec::Dqnn { variant, readouts: default } => {
                ModelSpec::Dqnn { variant, readouts: readouts.unwrap_or(default) }
            }
            other => other,
        });
        let m: usize = parse(&pairs, "learn.m")?.unwrap_or(64);
        let seeds: usize = parse(&pairs, "learn.seeds")?.unwrap_or(1);
        if seeds == 0 {
            return Err("learn.seeds must be at least 1".into());
        }
        let batch_fraction: f64 = parse(&pairs, "learn.batch_fraction")?.unwrap_or(0.5);
        if !(batch_fraction > 0.0 && batch_fraction <= 1.0) {
            return Err("learn.batch_fraction must be in (0, 1]".into());
        }
        let learning_rate: Option<f64> = parse(&pairs, "learn.learning_rate")?;
        if learning_rate.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
            return Err("learn.learning_rate must be positive".into());
        }
        let samples: u64 = parse(&pairs, "prior.samples")?.unwrap_or(100_000);
        if samples == 0 {
            return Err("prior.samples must be at least 1".into());
        }
        let sizes = match pairs.get("kernel.sizes") {
            Some(s) => parse_sizes(s)?,
            None => (2..=(1usize << n).min(128)).step_by(2).collect(),
        };
        let trials: usize = parse(&pairs, "kernel.trials")?.unwrap_or(500);
        let inputs: Vec<PathBuf> = pairs
            .get("report.inputs")
            .map(|s| s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect())
            .unwrap_or_default();
        let config = Self {
            experiment,
            seed,
            out: parse(&pairs, "run.out")?.unwrap_or_else(|| PathBuf::from("out")),
            workers: parse(&pairs, "run.workers")?,
            n,
            suite_seed: parse(&pairs, "boolean.suite_seed")?.unwrap_or(seed),
            target: parse(&pairs, "boolean.target")?.unwrap_or_else(|| "parity".into()),
            encoding,
            bias: parse(&pairs, "express.bias")?,
            model,
            m,
            seeds,
            learning_rate,
            epochs: parse(&pairs, "learn.epochs")?.unwrap_or(2000),
            batch_fraction,
            width,
            readouts,
            universal: parse(&pairs, "dqnn.universal")?.unwrap_or(false),
            samples,
            layers: parse(&pairs, "kernel.layers")?.unwrap_or(0),
            sizes,
            trials,
            images: parse(&pairs, "ingest.images")?
                .unwrap_or_else(|| PathBuf::from("data/fashion-mnist/classes-0-3-images-idx3-ubyte.gz")),
            labels: parse(&pairs, "ingest.labels")?
                .unwrap_or_else(|| PathBuf::from("data/fashion-mnist/classes-0-3-labels-idx1-ubyte.gz")),
            train: parse(&pairs, "ingest.train")?.unwrap_or(250),
            test: parse(&pairs, "ingest.test")?.unwrap_or(50),
            inputs,
            svg: parse(&pairs, "report.svg")?.unwrap_or(false),
            entries: BTreeMap::new(),
        };
        config.check_model()?;
        pairs.insert("run.experiment".into(), experiment.name().into());
        Ok(Self { entries: pairs, ..config })
    }

    fn check_model(&self) -> Result<(), String> {
        if self.workers == Some(0) {
            return Err("run.workers must be at least 1".into());
        }
        match self.experiment {
            Experiment::TrainSuite => {
                let model = self.model.ok_or("train-suite needs learn.model")?;
                if !model.accepts(self.encoding) {
                    return Err(format!("model {model} cannot be trained on {} data", self.encoding));
                }
                if self.m == 0 || self.m > 1 << self.n {
                    return Err(format!("learn.m must be in 1..={}", 1 << self.n));
                }
            }
            Experiment::Dqnn => {
                if !self.universal && !matches!(self.encoding, Encoding::Amplitude01 | Encoding::AmplitudePm1) {
                    return Err("dqnn needs an amplitude encoding".into());
                }
                if self.universal && self.n > qperc_core::learn::dqnn::UNIVERSAL_MAX_N {
                    return Err(format!(
                        "universal construction supports n <= {}",
                        qperc_core::learn::dqnn::UNIVERSAL_MAX_N
                    ));
                }
            }
            Experiment::Prior if self.encoding.is_classical() => {
                return Err("prior sampling needs a quantum encoding".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Canonical `key = value` text of the resolved configuration.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// FNV-1a over the canonical text minus keys that cannot change results
    /// (output directory, worker count).
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let text: String = self
            .entries
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "run.out" | "run.workers"))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Learning rate for `model`, falling back to the model's default.
    pub fn learning_rate_for(&self, model: ModelSpec) -> f64 {
        self.learning_rate.unwrap_or_else(|| model.default_learning_rate())
    }
}
