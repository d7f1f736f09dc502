//! Two-layer quantum networks with intermediate measurement.
//!
//! Layer one has `p` readout qubits. Each readout is thresholded after adding
//! a bias, and the resulting bit string is re-encoded as a fresh state: by
//! amplitude (variant alpha, `ceil(log2 p)` qubits) or as a basis state
//! (variant beta, `p` qubits). Layer two is a single-readout QNN on that state.
//!
//! Readout `k` of layer one is stored as the observable `A_k` with
//! `<Z_k> = x† A_k x`; a unitary realising it is available through
//! [`DqnnModel::readout_unitaries`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use super::{classification_error, gather, mse, Parameters, TrainConfig, TrainedModel};
use crate::boolean::{BooleanFunction, Split};
use crate::encode::{Embedding, EncodedDataset, StateVector};
use crate::error::{Error, Result};
use crate::num::Complex64;
use crate::qmap::{observable_to_unitary, CMatrix, HermitianObservable, QnnUnitary, SPECTRAL_TOL};
use crate::rng::{stream, Rng};

/// Temperature of the sigmoid that stands in for the step function when
/// back-propagating through the threshold.
pub const SURROGATE_TEMPERATURE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DqnnVariant {
    /// Amplitude re-encoding of the intermediate bits.
    Alpha,
    /// Basis re-encoding of the intermediate bits.
    Beta,
}

impl fmt::Display for DqnnVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DqnnVariant::Alpha => "alpha",
            DqnnVariant::Beta => "beta",
        })
    }
}

impl FromStr for DqnnVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" | "a" => Ok(DqnnVariant::Alpha),
            "beta" | "b" => Ok(DqnnVariant::Beta),
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

impl DqnnVariant {
    /// Hilbert dimension of the re-encoded intermediate state for `p` readouts.
    pub fn intermediate_dim(self, p: usize) -> usize {
        match self {
            DqnnVariant::Alpha => p.next_power_of_two().max(2),
            DqnnVariant::Beta => 1 << p,
        }
    }

    /// Re-encode intermediate bits (readout 0 first).
    pub fn reencode(self, bits: &[bool]) -> StateVector {
        let dim = self.intermediate_dim(bits.len());
        match self {
            DqnnVariant::Alpha => {
                let ones = bits.iter().filter(|&&b| b).count();
                if ones == 0 {
                    return StateVector::basis(dim, 0);
                }
                let v = Complex64::new(1.0 / (ones as f64).sqrt(), 0.0);
                let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                for (a, &b) in amps.iter_mut().zip(bits) {
                    if b {
                        *a = v;
                    }
                }
                StateVector::new(amps).expect("unit norm by construction")
            }
            DqnnVariant::Beta => StateVector::basis(dim, bits_to_index(bits)),
        }
    }
}

fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DqnnModel {
    pub variant: DqnnVariant,
    /// One observable per readout, all acting on the data register.
    pub readouts: Vec<HermitianObservable>,
    pub biases: Vec<f64>,
    /// Observable of the single readout of layer two.
    pub output: HermitianObservable,
}

fn check_contraction(a: &HermitianObservable) -> Result<()> {
    let norm = a.spectral_norm();
    if norm > 1.0 + SPECTRAL_TOL {
        return Err(Error::SpectralBoundViolated(norm));
    }
    Ok(())
}

impl DqnnModel {
    pub fn new(
        variant: DqnnVariant,
        readouts: Vec<HermitianObservable>,
        biases: Vec<f64>,
        output: HermitianObservable,
    ) -> Result<Self> {
        let Some(first) = readouts.first() else {
            return Err(Error::InvalidInput("at least one readout is required".into()));
        };
        if let Some(bad) = readouts.iter().find(|a| a.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: bad.dim() });
        }
        if biases.len() != readouts.len() {
            return Err(Error::DimensionMismatch { expected: readouts.len(), found: biases.len() });
        }
        let dim = variant.intermediate_dim(readouts.len());
        if output.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: output.dim() });
        }
        for a in readouts.iter().chain([&output]) {
            check_contraction(a)?;
        }
        Ok(Self { variant, readouts, biases, output })
    }

    pub fn readout_count(&self) -> usize {
        self.readouts.len()
    }

    pub fn data_dim(&self) -> usize {
        self.readouts[0].dim()
    }

    /// `<Z_k>` for every readout of layer one.
    pub fn readout_expectations(&self, x: &StateVector) -> Result<Vec<f64>> {
        if x.dim() != self.data_dim() {
            return Err(Error::DimensionMismatch { expected: self.data_dim(), found: x.dim() });
        }
        Ok(self.readouts.iter().map(|a| a.expectation(x.amps())).collect())
    }

    /// Thresholded intermediate bits `step(<Z_k> + b_k)`.
    pub fn intermediate(&self, x: &StateVector) -> Result<Vec<bool>> {
        Ok(self.readout_expectations(x)?.iter().zip(&self.biases).map(|(z, b)| z + b > 0.0).collect())
    }

    /// Single-readout unitaries realising each layer-one readout.
    pub fn readout_unitaries(&self) -> Result<Vec<QnnUnitary>> {
        self.readouts.iter().map(observable_to_unitary).collect()
    }

    pub fn output_unitary(&self) -> Result<QnnUnitary> {
        observable_to_unitary(&self.output)
    }
}

/// Output of layer two on the re-encoded intermediate state.
pub fn dqnn_forward(model: &DqnnModel, x: &StateVector) -> Result<f64> {
    let bits = model.intermediate(x)?;
    Ok(model.output.expectation(model.variant.reencode(&bits).amps()))
}

/// Dense unitary with several readout qubits (most significant) over a data register.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiReadoutUnitary {
    u: CMatrix,
    readouts: usize,
    data_dim: usize,
}

impl MultiReadoutUnitary {
    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn readouts(&self) -> usize {
        self.readouts
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    /// `<Z_k>` for each readout on `|0…0>|x>`.
    pub fn expectations(&self, x: &StateVector) -> Result<Vec<f64>> {
        if x.dim() != self.data_dim {
            return Err(Error::DimensionMismatch { expected: self.data_dim, found: x.dim() });
        }
        let psi = self.u.columns(0, self.data_dim) * DVector::from_column_slice(x.amps());
        let mut z = vec![0.0; self.readouts];
        for (idx, amp) in psi.iter().enumerate() {
            let r = idx / self.data_dim;
            for (k, zk) in z.iter_mut().enumerate() {
                let bit = (r >> (self.readouts - 1 - k)) & 1;
                *zk += if bit == 0 { amp.norm_sqr() } else { -amp.norm_sqr() };
            }
        }
        Ok(z)
    }
}

/// Readouts `k = 0..d` with `<Z_k> = Σ_i w_k[i] |x_i|²`.
///
/// Built as a product of one factor per readout. Factor `k` rotates readout
/// qubit `k` by `[[c, -s], [s, c]]` with `c = sqrt((1 + w_k[i])/2)` and
/// `s = sqrt((1 - w_k[i])/2)`, conditioned on data basis state `i`. Feeding
/// the square roots of a probability vector `x` gives `<Z_k> = w_k · x`.
pub fn multi_readout_unitary(weights: &[Vec<f64>]) -> Result<MultiReadoutUnitary> {
    let Some(first) = weights.first() else {
        return Err(Error::InvalidInput("at least one readout is required".into()));
    };
    let len = first.len();
    if let Some(bad) = weights.iter().find(|w| w.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, found: bad.len() });
    }
    if let Some(&w) = weights.iter().flatten().find(|w| w.abs() > 1.0) {
        return Err(Error::SpectralBoundViolated(w.abs()));
    }
    let d = weights.len();
    let data_dim = len.next_power_of_two();
    let dim = (1 << d) * data_dim;
    let mut u = CMatrix::identity(dim, dim);
    for (k, w) in weights.iter().enumerate() {
        let shift = d - 1 - k;
        let mut factor = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (r, i) = (col / data_dim, col % data_dim);
            let wi = w.get(i).copied().unwrap_or(1.0);
            let c = ((1.0 + wi) / 2.0).sqrt();
            let s = ((1.0 - wi) / 2.0).sqrt();
            let zero = (r & !(1 << shift)) * data_dim + i;
            let one = (r | (1 << shift)) * data_dim + i;
            if (r >> shift) & 1 == 0 {
                factor[(zero, col)] = Complex64::new(c, 0.0);
                factor[(one, col)] = Complex64::new(s, 0.0);
            } else {
                factor[(zero, col)] = Complex64::new(-s, 0.0);
                factor[(one, col)] = Complex64::new(c, 0.0);
            }
        }
        u = factor * u;
    }
    Ok(MultiReadoutUnitary { u, readouts: d, data_dim })
}

fn diagonal(values: &[f64]) -> HermitianObservable {
    let d = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
    HermitianObservable::new(CMatrix::from_diagonal(&d)).expect("diagonal real matrices are Hermitian")
}

/// Largest input size handled by [`construct_universal_dqnn`].
pub const UNIVERSAL_MAX_N: usize = 5;

/// Network reproducing `f` exactly on every input encodable by normalised
/// 0/1 amplitude encoding (all inputs except the origin).
///
/// Beta: readout `k` measures `diag(e_k)`, which gives `x_k / |x|`, so a bias of
/// `-1/(2n)` recovers the input bits and the output is `diag(±1)` on the
/// recovered basis state. Alpha: one readout per subset `S` fires exactly when
/// the input's support lies inside `S`; the output is diagonal with entries
/// obtained by Möbius inversion over supersets, so that its mean over the
/// fired subsets has the sign of `f`.
pub fn construct_universal_dqnn(f: &BooleanFunction, variant: DqnnVariant) -> Result<DqnnModel> {
    let n = f.n();
    if n == 0 || n > UNIVERSAL_MAX_N {
        return Err(Error::InvalidInput(format!("input size {n} outside 1..={UNIVERSAL_MAX_N}")));
    }
    let data_dim = n.next_power_of_two();
    match variant {
        DqnnVariant::Beta => {
            let readouts = (0..n)
                .map(|k| diagonal(&(0..data_dim).map(|j| if j == k { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
                .collect();
            let biases = vec![-1.0 / (2.0 * n as f64); n];
            let output = diagonal(&(0..1 << n).map(|i| f.sign(i)).collect::<Vec<_>>());
            DqnnModel::new(variant, readouts, biases, output)
        }
        DqnnVariant::Alpha => {
            let subsets = 1usize << n;
            let member = |set: usize, k: usize| (set >> (n - 1 - k)) & 1 == 1;
            let readouts = (0..subsets)
                .map(|s| {
                    let d: Vec<f64> = (0..data_dim)
                        .map(|j| match j {
                            j if j >= n => 0.0,
                            j if member(s, j) => 1.0,
                            _ => -1.0,
                        })
                        .collect();
                    diagonal(&d)
                })
                .collect();
            let biases = vec![-(1.0 - 1.0 / n as f64); subsets];
            let coefficients: Vec<f64> = (0..subsets)
                .map(|s| {
                    (0..subsets)
                        .filter(|&t| t & s == s)
                        .map(|t| if (t ^ s).count_ones() % 2 == 0 { f.sign(t) } else { -f.sign(t) })
                        .sum()
                })
                .collect();
            let top = coefficients.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let output = diagonal(&coefficients.iter().map(|c| c / top).collect::<Vec<_>>());
            DqnnModel::new(variant, readouts, biases, output)
        }
    }
}

/// Nearest matrix with spectrum in `[-1, 1]`.
fn project_contraction(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let clipped = eig.eigenvalues.map(|v| v.clamp(-1.0, 1.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

fn random_symmetric(dim: usize, rng: &mut Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    project_contraction(&((&g + g.transpose()) / (2.0 * (dim as f64).sqrt())))
}

fn sigmoid_slope(u: f64) -> f64 {
    let s = 1.0 / (1.0 + (-u / SURROGATE_TEMPERATURE).exp());
    s * (1.0 - s) / SURROGATE_TEMPERATURE
}

/// Trainable parameters: real symmetric observables and biases.
struct Params {
    variant: DqnnVariant,
    readouts: Vec<DMatrix<f64>>,
    biases: Vec<f64>,
    /// Full matrix for alpha; only the diagonal is read for beta.
    output: DMatrix<f64>,
}

struct Pass {
    out: f64,
    bits: Vec<bool>,
    pre: Vec<f64>,
}

impl Params {
    fn forward(&self, x: &DMatrix<f64>) -> Pass {
        let pre: Vec<f64> = self.readouts.iter().zip(&self.biases).map(|(a, b)| a.dot(x) + b).collect();
        let bits: Vec<bool> = pre.iter().map(|&u| u > 0.0).collect();
        let out = match self.variant {
            DqnnVariant::Alpha => {
                let v = alpha_vector(&bits, self.output.nrows());
                (v.transpose() * &self.output * &v)[(0, 0)]
            }
            DqnnVariant::Beta => {
                let idx = bits_to_index(&bits);
                self.output[(idx, idx)]
            }
        };
        Pass { out, bits, pre }
    }

    fn into_model(self) -> Result<DqnnModel> {
        let lift = |m: &DMatrix<f64>| HermitianObservable::new(m.map(|v| Complex64::new(v, 0.0)));
        let output = match self.variant {
            DqnnVariant::Alpha => lift(&self.output)?,
            DqnnVariant::Beta => lift(&DMatrix::from_diagonal(&self.output.diagonal()))?,
        };
        let readouts = self.readouts.iter().map(lift).collect::<Result<_>>()?;
        DqnnModel::new(self.variant, readouts, self.biases, output)
    }
}

fn alpha_vector(bits: &[bool], dim: usize) -> DVector<f64> {
    let ones = bits.iter().filter(|&&b| b).count();
    let mut v = DVector::zeros(dim);
    if ones == 0 {
        v[0] = 1.0;
    } else {
        let a = 1.0 / (ones as f64).sqrt();
        for (k, &b) in bits.iter().enumerate() {
            if b {
                v[k] = a;
            }
        }
    }
    v
}

/// `d out / d bit_k` with the bits treated as continuous.
fn output_slopes(params: &Params, pass: &Pass) -> Vec<f64> {
    let p = pass.bits.len();
    match params.variant {
        DqnnVariant::Alpha => {
            let ones = pass.bits.iter().filter(|&&b| b).count();
            if ones == 0 {
                // switching on bit k alone moves the state to |k>
                return (0..p).map(|k| params.output[(k, k)] - pass.out).collect();
            }
            let v = alpha_vector(&pass.bits, params.output.nrows());
            let av = &params.output * &v;
            let scale = 2.0 / (ones as f64).sqrt();
            (0..p).map(|k| scale * (av[k] - pass.out * v[k])).collect()
        }
        DqnnVariant::Beta => {
            let idx = bits_to_index(&pass.bits);
            (0..p)
                .map(|k| {
                    let mask = 1 << (p - 1 - k);
                    params.output[(idx | mask, idx | mask)] - params.output[(idx & !mask, idx & !mask)]
                })
                .collect()
        }
    }
}

/// Gradient training of a network with `p` readouts.
///
/// The forward pass uses the hard threshold; the backward pass replaces its
/// derivative by that of a sigmoid at [`SURROGATE_TEMPERATURE`]. Observables are
/// real symmetric and are projected back to spectral norm at most 1 after
/// every step.
pub fn train_dqnn(
    dataset: &EncodedDataset,
    labels: &[bool],
    split: &Split,
    config: &TrainConfig,
    p: usize,
    variant: DqnnVariant,
) -> Result<TrainedModel> {
    if p == 0 {
        return Err(Error::InvalidInput("at least one readout is required".into()));
    }
    let (points, y) = gather(dataset, labels, &split.train)?;
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    // Re(x x†), the feature each readout pairs with its observable
    let outer: Vec<DMatrix<f64>> = points
        .iter()
        .map(|e| match e {
            Embedding::State(s) => {
                let a = s.amps();
                Ok(DMatrix::from_fn(a.len(), a.len(), |i, j| (a[i].conj() * a[j]).re))
            }
            Embedding::Real(_) => Err(Error::InvalidInput("network needs quantum states".into())),
        })
        .collect::<Result<_>>()?;
    let data_dim = outer[0].nrows();
    let inter = variant.intermediate_dim(p);

    let mut rng = stream(config.seed, "init-dqnn", p as u64);
    let readouts = (0..p).map(|_| random_symmetric(data_dim, &mut rng)).collect();
    let output = match variant {
        DqnnVariant::Alpha => random_symmetric(inter, &mut rng),
        DqnnVariant::Beta => DMatrix::from_diagonal(
            &DVector::from_fn(inter, |_, _| StandardNormal.sample(&mut rng)).map(|v: f64| (v * 0.1).clamp(-1.0, 1.0)),
        ),
    };
    let mut params = Params { variant, readouts, biases: vec![0.0; p], output };

    let m = outer.len();
    let batch = config.batch_size(m);
    let mut order: Vec<usize> = (0..m).collect();
    let mut history = Vec::new();
    let mut error = 1.0;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut g_read = vec![DMatrix::<f64>::zeros(data_dim, data_dim); p];
            let mut g_bias = vec![0.0; p];
            let mut g_out = DMatrix::<f64>::zeros(inter, inter);
            for &i in chunk {
                let pass = params.forward(&outer[i]);
                let d_out = 2.0 * (pass.out - y[i]);
                match variant {
                    DqnnVariant::Alpha => {
                        let v = alpha_vector(&pass.bits, inter);
                        g_out += &v * v.transpose() * d_out;
                    }
                    DqnnVariant::Beta => {
                        let idx = bits_to_index(&pass.bits);
                        g_out[(idx, idx)] += d_out;
                    }
                }
                for (k, slope) in output_slopes(&params, &pass).into_iter().enumerate() {
                    let d_pre = d_out * slope * sigmoid_slope(pass.pre[k]);
                    if d_pre != 0.0 {
                        g_read[k] += &outer[i] * d_pre;
                        g_bias[k] += d_pre;
                    }
                }
            }
            let step = config.learning_rate / chunk.len() as f64;
            for (a, g) in params.readouts.iter_mut().zip(&g_read) {
                *a = project_contraction(&(&*a - g * step));
            }
            for (b, g) in params.biases.iter_mut().zip(&g_bias) {
                *b -= step * g;
            }
            params.output = match variant {
                DqnnVariant::Alpha => project_contraction(&(&params.output - g_out * step)),
                DqnnVariant::Beta => (&params.output - g_out * step).map(|v| v.clamp(-1.0, 1.0)),
            };
        }
        let scores: Vec<f64> = outer.iter().map(|x| params.forward(x).out).collect();
        history.push(mse(&scores, &y));
        error = classification_error(&scores, &y);
        if config.should_stop(&history, error) {
            break;
        }
    }
    Ok(TrainedModel { parameters: Parameters::Dqnn(params.into_model()?), history, converged: error == 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::{parity, split_train_test};
    use crate::encode::{sqrt_amplitude_encode, Encoding};
    use crate::qmap::{qnn_eval, unitarity_defect};

    #[test]
    fn forward_examples() {
        let p = 3;
        let ident = diagonal(&[1.0; 4]);
        let mut out = vec![0.0; 1 << p];
        out[(1 << p) - 1] = 1.0;
        let model = DqnnModel::new(DqnnVariant::Beta, vec![ident; p], vec![0.0; p], diagonal(&out)).unwrap();
        let x = StateVector::basis(4, 0);
        assert_eq!(model.readout_expectations(&x).unwrap(), vec![1.0; p]);
        assert_eq!(model.intermediate(&x).unwrap(), vec![true; p]);
        assert!((dqnn_forward(&model, &x).unwrap() - 1.0).abs() < 1e-15);

        let model = DqnnModel { output: diagonal(&[1.0; 8]), ..model };
        for i in 0..4 {
            assert!((dqnn_forward(&model, &StateVector::basis(4, i)).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_all_zero_goes_to_first_state() {
        assert_eq!(DqnnVariant::Alpha.reencode(&[false; 5]), StateVector::basis(8, 0));
        assert_eq!(DqnnVariant::Beta.reencode(&[true, false, true]), StateVector::basis(8, 5));
    }

    #[test]
    fn readout_unitaries_match_observables() {
        let f: BooleanFunction = "01101001".parse().unwrap();
        let model = construct_universal_dqnn(&f, DqnnVariant::Beta).unwrap();
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        for (u, a) in model.readout_unitaries().unwrap().iter().zip(&model.readouts) {
            for s in ds.states().unwrap() {
                assert!((qnn_eval(u, s.amps()).unwrap() - a.expectation(s.amps())).abs() < 1e-9);
            }
        }
        assert!(unitarity_defect(model.output_unitary().unwrap().matrix()) < 1e-9);
    }

    #[test]
    fn multi_readout_examples() {
        let u = multi_readout_unitary(&[vec![1.0, 1.0]]).unwrap();
        let x = sqrt_amplitude_encode(&[0.3, 0.7]).unwrap();
        assert!((u.expectations(&x).unwrap()[0] - 1.0).abs() < 1e-12);
        let u = multi_readout_unitary(&[vec![1.0, -1.0]]).unwrap();
        let x = sqrt_amplitude_encode(&[0.25, 0.75]).unwrap();
        assert!((u.expectations(&x).unwrap()[0] + 0.5).abs() < 1e-12);
        assert!(multi_readout_unitary(&[vec![1.5, 0.0]]).is_err());
    }

    #[test]
    fn multi_readout_three_perceptrons() {
        use rand::Rng as _;
        let mut rng = stream(4, "multi", 0);
        let weights: Vec<Vec<f64>> = (0..3).map(|_| (0..4).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
        let u = multi_readout_unitary(&weights).unwrap();
        assert!(unitarity_defect(u.matrix()) < 1e-9);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let z = u.expectations(&sqrt_amplitude_encode(&p).unwrap()).unwrap();
            for (w, zk) in weights.iter().zip(&z) {
                let expected: f64 = w.iter().zip(&p).map(|(a, b)| a * b).sum();
                assert!((zk - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn universal_construction_exhaustive_n3() {
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        for variant in [DqnnVariant::Alpha, DqnnVariant::Beta] {
            for code in 0..256usize {
                let f = BooleanFunction::from_fn(3, |i| (code >> i) & 1 == 1);
                let model = construct_universal_dqnn(&f, variant).unwrap();
                for (s, &i) in ds.states().unwrap().iter().zip(&ds.indices) {
                    assert_eq!(dqnn_forward(&model, s).unwrap() > 0.0, f.label(i), "{variant} {f} input {i}");
                }
            }
        }
        let ones = construct_universal_dqnn(&BooleanFunction::constant(3, true), DqnnVariant::Beta).unwrap();
        assert_eq!(ones.output, diagonal(&[1.0; 8]));
    }

    #[test]
    fn universal_construction_sampled_n4_n5() {
        let suite4 = crate::boolean::generate_target_suite(4, 2);
        let suite5 = crate::boolean::generate_target_suite(5, 2);
        for (n, suite) in [(4, suite4), (5, suite5)] {
            let ds = EncodedDataset::boolean(Encoding::Amplitude01, n).unwrap();
            for f in suite.functions().take(12) {
                for variant in [DqnnVariant::Alpha, DqnnVariant::Beta] {
                    let model = construct_universal_dqnn(f, variant).unwrap();
                    for (s, &i) in ds.states().unwrap().iter().zip(&ds.indices) {
                        assert_eq!(dqnn_forward(&model, s).unwrap() > 0.0, f.label(i));
                    }
                }
            }
        }
    }

    #[test]
    fn training_fits_trivial_target() {
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        let split = Split { train: ds.indices.clone(), test: ds.indices.clone() };
        let cfg = TrainConfig::default().with_learning_rate(0.2).with_epochs(300);
        for variant in [DqnnVariant::Alpha, DqnnVariant::Beta] {
            let m = train_dqnn(&ds, BooleanFunction::constant(3, true).bits(), &split, &cfg, 3, variant).unwrap();
            assert!(m.converged, "{variant}");
        }
    }

    #[test]
    fn training_fits_small_parity() {
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        let split = split_train_test(&ds.indices, 7, 0).unwrap();
        let cfg = TrainConfig::default().with_learning_rate(0.2).with_epochs(2000);
        let m = train_dqnn(&ds, parity(3).bits(), &split, &cfg, 3, DqnnVariant::Beta).unwrap();
        let Parameters::Dqnn(model) = &m.parameters else { unreachable!() };
        assert!(model.readouts.iter().all(|a| a.spectral_norm() <= 1.0 + 1e-9));
        assert!(m.history.len() <= cfg.epochs);
    }
}
