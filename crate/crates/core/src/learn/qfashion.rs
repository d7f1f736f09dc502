//! Model comparison on the reduced FashionMNIST task.

use super::dqnn::DqnnVariant;
use super::{error_rate, ModelSpec, TrainConfig};
use crate::encode::{EncodedDataset, Encoding};
use crate::error::Result;
use crate::ingest::QFashionDataset;
use crate::kernel::{quantum_fcn_kernel, ridgeless_errors};

/// Readouts of both DQNN variants on this task.
pub const QFASHION_READOUTS: usize = 8;
/// Hidden width of the classical network.
pub const QFASHION_FCN_WIDTH: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelScore {
    pub model: String,
    pub train_error: f64,
    pub test_error: f64,
}

pub const SCORE_HEADER: &str = "model,train_error,test_error";

pub fn scores_to_csv(scores: &[ModelScore]) -> String {
    let mut out = format!("{SCORE_HEADER}\n");
    for s in scores {
        out.push_str(&format!(
            "{},{},{}\n",
            s.model,
            crate::num::fixed(s.train_error),
            crate::num::fixed(s.test_error)
        ));
    }
    out
}

/// The PCA coordinates scaled to unit length, as real inputs.
pub fn unit_projections(data: &QFashionDataset) -> Result<EncodedDataset> {
    let normed: Vec<Vec<f64>> = data
        .inputs
        .iter()
        .map(|x| {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter().map(|v| v / norm).collect()
        })
        .collect();
    EncodedDataset::from_inputs(Encoding::Classical, &normed)
}

/// Perceptron and FCN on the unit-length coordinates, TPP and both DQNNs on
/// the amplitude states, and ridgeless regression with the one-layer hybrid
/// kernel.
pub fn evaluate_qfashion(data: &QFashionDataset, seed: u64) -> Result<Vec<ModelScore>> {
    let classical = unit_projections(data)?;
    let quantum = &data.encoded;
    let models = [
        (ModelSpec::Perceptron, &classical),
        (ModelSpec::Fcn { width: Some(QFASHION_FCN_WIDTH) }, &classical),
        (ModelSpec::Tpp, quantum),
        (ModelSpec::Dqnn { variant: DqnnVariant::Alpha, readouts: QFASHION_READOUTS }, quantum),
        (ModelSpec::Dqnn { variant: DqnnVariant::Beta, readouts: QFASHION_READOUTS }, quantum),
    ];
    let mut scores = Vec::new();
    for (model, dataset) in models {
        let cfg = TrainConfig::default().with_seed(seed).with_learning_rate(model.default_learning_rate());
        let trained = model.train(dataset, &data.labels, &data.split, &cfg)?;
        scores.push(ModelScore {
            model: model.tag(),
            train_error: error_rate(&trained, dataset, &data.labels, &data.split.train)?,
            test_error: error_rate(&trained, dataset, &data.labels, &data.split.test)?,
        });
    }
    let states = quantum.states().unwrap_or_default();
    let k = quantum_fcn_kernel(&states, 1)?;
    // inputs are never dropped here, so input index and kernel row coincide
    let (train_error, test_error) = ridgeless_errors(&k, &data.labels, &data.split.train, &data.split.test)?;
    scores.push(ModelScore { model: "kq1".into(), train_error, test_error });
    Ok(scores)
}
