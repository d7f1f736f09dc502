//! Trainers for the linear (TPP, perceptron), fully connected and layered
//! quantum models, plus error metrics and experiment records.

pub mod dqnn;
pub mod qfashion;
pub mod suite;

use nalgebra::DMatrix;
use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;

use crate::boolean::Split;
use crate::encode::{Embedding, EncodedDataset};
use crate::error::{Error, Result};
use crate::num::{fixed, parse_f64};
use crate::qmap::{tpp_eval, tpp_to_observable, TppWeights};
use crate::rng::{stream, Rng};

pub use dqnn::{
    construct_universal_dqnn, dqnn_forward, multi_readout_unitary, train_dqnn, DqnnModel, DqnnVariant,
    MultiReadoutUnitary,
};
pub use qfashion::{evaluate_qfashion, scores_to_csv, ModelScore};
pub use suite::{run_trial, train_suite, ModelSpec};

/// Mini-batch SGD settings shared by all trainers.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Epoch cap.
    pub epochs: usize,
    /// Batch size as a fraction of the training set.
    pub batch_fraction: f64,
    pub seed: u64,
    /// Epochs over which the loss must keep improving once training error is 0.
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.5, epochs: 2000, batch_fraction: 0.5, seed: 0, patience: 50, min_improvement: 1e-6 }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_batch_fraction(mut self, batch_fraction: f64) -> Self {
        self.batch_fraction = batch_fraction;
        self
    }

    pub fn batch_size(&self, train_size: usize) -> usize {
        ((self.batch_fraction * train_size as f64).round() as usize).clamp(1, train_size.max(1))
    }

    fn should_stop(&self, history: &[f64], train_error: f64) -> bool {
        if train_error > 0.0 || history.len() <= self.patience {
            return false;
        }
        let last = history[history.len() - 1];
        history[history.len() - 1 - self.patience] - last < self.min_improvement
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Tpp,
    Perceptron,
    Fcn,
    Dqnn,
}

/// One-hidden-layer ReLU network with a scalar output.
#[derive(Clone, Debug, PartialEq)]
pub struct Fcn {
    /// `width × inputs`.
    pub hidden_weights: DMatrix<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl Fcn {
    /// Zero biases and weights uniform in `±1/sqrt(fan_in)`.
    pub fn init(inputs: usize, width: usize, rng: &mut Rng) -> Self {
        let h = Uniform::new_inclusive(-1.0 / (inputs as f64).sqrt(), 1.0 / (inputs as f64).sqrt()).expect("finite");
        let o = Uniform::new_inclusive(-1.0 / (width as f64).sqrt(), 1.0 / (width as f64).sqrt()).expect("finite");
        Self {
            hidden_weights: DMatrix::from_fn(width, inputs, |_, _| h.sample(rng)),
            hidden_bias: vec![0.0; width],
            output_weights: (0..width).map(|_| o.sample(rng)).collect(),
            output_bias: 0.0,
        }
    }

    pub fn width(&self) -> usize {
        self.hidden_bias.len()
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.width())
            .map(|k| {
                let pre: f64 =
                    self.hidden_weights.row(k).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.hidden_bias[k];
                pre.max(0.0)
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        self.hidden(x).iter().zip(&self.output_weights).map(|(h, w)| h * w).sum::<f64>() + self.output_bias
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Parameters {
    Tpp(TppWeights),
    /// Weights on the raw input followed by a constant-1 feature.
    Perceptron(Vec<f64>),
    Fcn(Fcn),
    Dqnn(DqnnModel),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub parameters: Parameters,
    /// Training MSE after each epoch.
    pub history: Vec<f64>,
    /// Zero training classification error at the end of training.
    pub converged: bool,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.parameters {
            Parameters::Tpp(_) => ModelKind::Tpp,
            Parameters::Perceptron(_) => ModelKind::Perceptron,
            Parameters::Fcn(_) => ModelKind::Fcn,
            Parameters::Dqnn(_) => ModelKind::Dqnn,
        }
    }

    /// Short model name used in experiment records.
    pub fn tag(&self) -> String {
        match &self.parameters {
            Parameters::Tpp(_) => "tpp".into(),
            Parameters::Perceptron(_) => "perceptron".into(),
            Parameters::Fcn(_) => "fcn".into(),
            Parameters::Dqnn(m) => format!("dqnn-{}", m.variant),
        }
    }

    /// Real-valued output before thresholding.
    pub fn score(&self, x: &Embedding) -> Result<f64> {
        match (&self.parameters, x) {
            (Parameters::Tpp(w), Embedding::State(s)) => tpp_eval(w, &crate::qmap::complex_tensor_square(s.amps())),
            (Parameters::Perceptron(w), Embedding::Real(v)) => {
                if w.len() != v.len() + 1 {
                    return Err(Error::DimensionMismatch { expected: w.len() - 1, found: v.len() });
                }
                Ok(v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + w[v.len()])
            }
            (Parameters::Fcn(net), Embedding::Real(v)) => {
                if net.hidden_weights.ncols() != v.len() {
                    return Err(Error::DimensionMismatch { expected: net.hidden_weights.ncols(), found: v.len() });
                }
                Ok(net.forward(v))
            }
            (Parameters::Dqnn(m), Embedding::State(s)) => dqnn_forward(m, s),
            _ => Err(Error::InvalidInput(format!("{} model cannot read this embedding", self.tag()))),
        }
    }

    /// Class 1 iff the score is strictly positive.
    pub fn predict(&self, x: &Embedding) -> Result<bool> {
        Ok(self.score(x)? > 0.0)
    }
}

fn target(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

/// Embeddings and ±1 targets of the listed inputs.
fn gather<'a>(
    dataset: &'a EncodedDataset,
    labels: &[bool],
    indices: &[usize],
) -> Result<(Vec<&'a Embedding>, Vec<f64>)> {
    let mut points = Vec::with_capacity(indices.len());
    let mut targets = Vec::with_capacity(indices.len());
    for &i in indices {
        let p = dataset.point(i).ok_or_else(|| Error::InvalidInput(format!("input {i} is not in the dataset")))?;
        let label = *labels.get(i).ok_or(Error::IndexOutOfRange { index: i, n: labels.len() })?;
        points.push(p);
        targets.push(target(label));
    }
    Ok((points, targets))
}

fn classification_error(scores: &[f64], targets: &[f64]) -> f64 {
    let wrong = scores.iter().zip(targets).filter(|(s, t)| (**s > 0.0) != (**t > 0.0)).count();
    wrong as f64 / targets.len().max(1) as f64
}

fn mse(scores: &[f64], targets: &[f64]) -> f64 {
    scores.iter().zip(targets).map(|(s, t)| (s - t).powi(2)).sum::<f64>() / targets.len().max(1) as f64
}

/// Mini-batch SGD on `w` for MSE of `w · h_i` against `y_i`, starting at
/// `w = 0`, run in the dual: `w = Σ_i c_i h_i` stays in the span of the
/// training features, so only the Gram matrix is needed. Returns the
/// coefficients `c`, the loss history and the final training error.
fn linear_sgd(gram: &DMatrix<f64>, y: &[f64], config: &TrainConfig, rng: &mut Rng) -> (Vec<f64>, Vec<f64>, f64) {
    let m = y.len();
    let batch = config.batch_size(m);
    let mut coef = vec![0.0; m];
    let mut order: Vec<usize> = (0..m).collect();
    let mut history = Vec::new();
    let scores = |coef: &[f64]| -> Vec<f64> { (0..m).map(|i| (0..m).map(|j| gram[(i, j)] * coef[j]).sum()).collect() };
    let mut error = classification_error(&scores(&coef), y);
    for _ in 0..config.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch) {
            let residuals: Vec<f64> =
                chunk.iter().map(|&i| (0..m).map(|j| gram[(i, j)] * coef[j]).sum::<f64>() - y[i]).collect();
            let step = 2.0 * config.learning_rate / chunk.len() as f64;
            for (&i, r) in chunk.iter().zip(&residuals) {
                coef[i] -= step * r;
            }
        }
        let s = scores(&coef);
        history.push(mse(&s, y));
        error = classification_error(&s, y);
        if config.should_stop(&history, error) {
            break;
        }
    }
    (coef, history, error)
}

fn linear_fit(features: &[Vec<f64>], y: &[f64], config: &TrainConfig, label: &str) -> (Vec<f64>, Vec<f64>, bool) {
    let m = features.len();
    let gram = DMatrix::from_fn(m, m, |i, j| features[i].iter().zip(&features[j]).map(|(a, b)| a * b).sum::<f64>());
    let mut rng = stream(config.seed, label, 0);
    let (coef, history, error) = linear_sgd(&gram, y, config, &mut rng);
    let dim = features.first().map_or(0, Vec::len);
    let mut w = vec![0.0; dim];
    for (h, c) in features.iter().zip(&coef) {
        for (wk, hk) in w.iter_mut().zip(h) {
            *wk += c * hk;
        }
    }
    (w, history, error == 0.0)
}

/// SGD on TPP weights over `x ⊛ x`, MSE against ±1 labels, zero initialisation.
pub fn train_tpp(
    dataset: &EncodedDataset,
    labels: &[bool],
    split: &Split,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    let (points, y) = gather(dataset, labels, &split.train)?;
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = match points[0] {
        Embedding::State(s) => s.dim(),
        Embedding::Real(_) => return Err(Error::InvalidInput("TPP needs quantum states".into())),
    };
    let features: Vec<Vec<f64>> = points.iter().map(|p| p.linear_features()).collect();
    let (w, history, converged) = linear_fit(&features, &y, config, "init-tpp");
    Ok(TrainedModel { parameters: Parameters::Tpp(TppWeights::new(dim, w)?), history, converged })
}

/// `w / |A(w)|₂`, the normalisation under which the weights come from a
/// unitary exactly. Zero weights are returned unchanged.
pub fn rescale_tpp(w: &TppWeights) -> TppWeights {
    let norm = tpp_to_observable(w).spectral_norm();
    if norm > 0.0 {
        w.scaled(1.0 / norm)
    } else {
        w.clone()
    }
}

/// Linear classifier on the raw input plus a bias feature.
pub fn train_perceptron(
    dataset: &EncodedDataset,
    labels: &[bool],
    split: &Split,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    let (points, y) = gather(dataset, labels, &split.train)?;
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = points
        .iter()
        .map(|p| match p {
            Embedding::Real(v) => Ok(v.iter().copied().chain([1.0]).collect()),
            Embedding::State(_) => Err(Error::InvalidInput("perceptron needs real inputs".into())),
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let (w, history, converged) = linear_fit(&features, &y, config, "init-perceptron");
    Ok(TrainedModel { parameters: Parameters::Perceptron(w), history, converged })
}

fn real_inputs(points: &[&Embedding]) -> Result<Vec<Vec<f64>>> {
    points
        .iter()
        .map(|p| match p {
            Embedding::Real(v) => Ok(v.clone()),
            Embedding::State(_) => Err(Error::InvalidInput("network needs real inputs".into())),
        })
        .collect()
}

/// Mini-batch SGD on a `(inputs, width, 1)` ReLU network.
pub fn train_fcn(
    dataset: &EncodedDataset,
    labels: &[bool],
    split: &Split,
    config: &TrainConfig,
    width: usize,
) -> Result<TrainedModel> {
    let (points, y) = gather(dataset, labels, &split.train)?;
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let x = real_inputs(&points)?;
    let inputs = x[0].len();
    let mut rng = stream(config.seed, "init-fcn", 0);
    let mut net = Fcn::init(inputs, width, &mut rng);
    let m = x.len();
    let batch = config.batch_size(m);
    let mut order: Vec<usize> = (0..m).collect();
    let mut history = Vec::new();
    let mut error = 1.0;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut g_hidden = DMatrix::zeros(width, inputs);
            let mut g_hbias = vec![0.0; width];
            let mut g_out = vec![0.0; width];
            let mut g_obias = 0.0;
            for &i in chunk {
                let h = net.hidden(&x[i]);
                let out = h.iter().zip(&net.output_weights).map(|(a, b)| a * b).sum::<f64>() + net.output_bias;
                let d = 2.0 * (out - y[i]);
                g_obias += d;
                for k in 0..width {
                    g_out[k] += d * h[k];
                    if h[k] > 0.0 {
                        let dk = d * net.output_weights[k];
                        g_hbias[k] += dk;
                        for (j, xv) in x[i].iter().enumerate() {
                            g_hidden[(k, j)] += dk * xv;
                        }
                    }
                }
            }
            let step = config.learning_rate / chunk.len() as f64;
            net.hidden_weights -= g_hidden * step;
            for k in 0..width {
                net.hidden_bias[k] -= step * g_hbias[k];
                net.output_weights[k] -= step * g_out[k];
            }
            net.output_bias -= step * g_obias;
        }
        let scores: Vec<f64> = x.iter().map(|v| net.forward(v)).collect();
        history.push(mse(&scores, &y));
        error = classification_error(&scores, &y);
        if config.should_stop(&history, error) {
            break;
        }
    }
    Ok(TrainedModel { parameters: Parameters::Fcn(net), history, converged: error == 0.0 })
}

/// Fraction of the listed inputs the model misclassifies.
pub fn error_rate(model: &TrainedModel, dataset: &EncodedDataset, labels: &[bool], indices: &[usize]) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (points, y) = gather(dataset, labels, indices)?;
    let scores = points.iter().map(|p| model.score(p)).collect::<Result<Vec<_>>>()?;
    Ok(classification_error(&scores, &y))
}

/// Fraction of misclassified held-out inputs.
pub fn test_error(model: &TrainedModel, dataset: &EncodedDataset, labels: &[bool], split: &Split) -> Result<f64> {
    error_rate(model, dataset, labels, &split.test)
}

/// One training run on one target function.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub function_index: usize,
    pub generator_tag: String,
    pub seed: u64,
    pub model: String,
    pub encoding: String,
    pub train_error: f64,
    pub test_error: f64,
    pub converged: bool,
    pub lz: f64,
    pub class_balance: f64,
}

pub const RECORD_HEADER: &str =
    "function_index,generator_tag,seed,model,encoding,train_error,test_error,converged,lz,class_balance";

impl ExperimentRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.function_index,
            self.generator_tag,
            self.seed,
            self.model,
            self.encoding,
            fixed(self.train_error),
            fixed(self.test_error),
            self.converged,
            fixed(self.lz),
            fixed(self.class_balance)
        )
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::Parse(format!("expected 10 fields, found {}", f.len())));
        }
        let int = |s: &str| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {s:?}")));
        let flag = |s: &str| s.trim().parse::<bool>().map_err(|_| Error::Parse(format!("bad flag {s:?}")));
        Ok(Self {
            function_index: int(f[0])? as usize,
            generator_tag: f[1].to_string(),
            seed: int(f[2])?,
            model: f[3].to_string(),
            encoding: f[4].to_string(),
            train_error: parse_f64(f[5])?,
            test_error: parse_f64(f[6])?,
            converged: flag(f[7])?,
            lz: parse_f64(f[8])?,
            class_balance: parse_f64(f[9])?,
        })
    }
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == RECORD_HEADER => {}
        Some(h) => return Err(Error::Parse(format!("unexpected header {h:?}"))),
        None => return Ok(Vec::new()),
    }
    lines.filter(|l| !l.trim().is_empty()).map(ExperimentRecord::from_csv_row).collect()
}
