//! Training one model on every function of a target suite.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::dqnn::{train_dqnn, DqnnVariant};
use super::{test_error, train_fcn, train_perceptron, train_tpp, ExperimentRecord, TrainConfig, TrainedModel};
use crate::boolean::{class_balance, lz_complexity, split_train_test, BooleanFunction, Split, TargetSuite};
use crate::encode::{EncodedDataset, Encoding};
use crate::error::{Error, Result};

/// A trainable model family with its architecture settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelSpec {
    Tpp,
    Perceptron,
    /// Hidden width; `None` means `2^n`.
    Fcn {
        width: Option<usize>,
    },
    Dqnn {
        variant: DqnnVariant,
        readouts: usize,
    },
}

impl ModelSpec {
    pub fn tag(&self) -> String {
        match self {
            ModelSpec::Tpp => "tpp".into(),
            ModelSpec::Perceptron => "perceptron".into(),
            ModelSpec::Fcn { .. } => "fcn".into(),
            ModelSpec::Dqnn { variant, .. } => format!("dqnn-{variant}"),
        }
    }

    /// Learning rate used when none is given.
    pub fn default_learning_rate(&self) -> f64 {
        match self {
            ModelSpec::Tpp | ModelSpec::Perceptron => TrainConfig::default().learning_rate,
            ModelSpec::Fcn { .. } => 0.05,
            ModelSpec::Dqnn { .. } => 0.1,
        }
    }

    /// Whether the model can consume datasets of this encoding.
    pub fn accepts(&self, encoding: Encoding) -> bool {
        match self {
            ModelSpec::Tpp => !encoding.is_classical(),
            ModelSpec::Perceptron | ModelSpec::Fcn { .. } => encoding.is_classical(),
            ModelSpec::Dqnn { .. } => matches!(encoding, Encoding::Amplitude01 | Encoding::AmplitudePm1),
        }
    }

    pub fn train(
        &self,
        dataset: &EncodedDataset,
        labels: &[bool],
        split: &Split,
        config: &TrainConfig,
    ) -> Result<TrainedModel> {
        match *self {
            ModelSpec::Tpp => train_tpp(dataset, labels, split, config),
            ModelSpec::Perceptron => train_perceptron(dataset, labels, split, config),
            ModelSpec::Fcn { width } => train_fcn(dataset, labels, split, config, width.unwrap_or(1 << dataset.n)),
            ModelSpec::Dqnn { variant, readouts } => train_dqnn(dataset, labels, split, config, readouts, variant),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// `tpp`, `perceptron`, `fcn`, `dqnn-alpha` or `dqnn-beta`; DQNN readout
    /// counts default to 64 (alpha) and 7 (beta).
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tpp" | "qnn" => ModelSpec::Tpp,
            "perceptron" => ModelSpec::Perceptron,
            "fcn" => ModelSpec::Fcn { width: None },
            "dqnn-alpha" => ModelSpec::Dqnn { variant: DqnnVariant::Alpha, readouts: 64 },
            "dqnn-beta" => ModelSpec::Dqnn { variant: DqnnVariant::Beta, readouts: 7 },
            other => return Err(Error::Parse(format!("unknown model {other:?}"))),
        })
    }
}

/// Train on one function with `m` training points drawn with `config.seed`.
pub fn run_trial(
    dataset: &EncodedDataset,
    f: &BooleanFunction,
    model: ModelSpec,
    m: usize,
    config: &TrainConfig,
) -> Result<(f64, f64, bool)> {
    let split = split_train_test(&dataset.indices, m, config.seed)?;
    let trained = model.train(dataset, f.bits(), &split, config)?;
    let train = super::error_rate(&trained, dataset, f.bits(), &split.train)?;
    let test = if split.test.is_empty() { 0.0 } else { test_error(&trained, dataset, f.bits(), &split)? };
    Ok((train, test, trained.converged))
}

/// One record per (function, seed), ordered by function then seed.
///
/// `config.seed` is ignored; each trial uses the seed from `seeds` for both
/// its split and its initialisation.
pub fn train_suite(
    dataset: &EncodedDataset,
    suite: &TargetSuite,
    model: ModelSpec,
    m: usize,
    seeds: &[u64],
    config: &TrainConfig,
) -> Result<Vec<ExperimentRecord>> {
    if suite.n != dataset.n {
        return Err(Error::DimensionMismatch { expected: dataset.n, found: suite.n });
    }
    if !model.accepts(dataset.encoding) {
        return Err(Error::InvalidInput(format!("{model} cannot be trained on {} data", dataset.encoding)));
    }
    let jobs: Vec<(usize, u64)> = (0..suite.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    jobs.par_iter()
        .map(|&(i, seed)| {
            let entry = &suite.entries[i];
            let cfg = config.clone().with_seed(seed);
            let (train_error, test_error, converged) = run_trial(dataset, &entry.function, model, m, &cfg)?;
            Ok(ExperimentRecord {
                function_index: i,
                generator_tag: entry.generator.to_string(),
                seed,
                model: model.tag(),
                encoding: dataset.encoding.tag().to_string(),
                train_error,
                test_error,
                converged,
                lz: lz_complexity(&entry.function),
                class_balance: class_balance(&entry.function),
            })
        })
        .collect()
}
