//! Classical-to-quantum encodings and the classical embeddings used as baselines.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::boolean::index_to_input;
use crate::error::{Error, Result};
use crate::num::{fixed, parse_f64, qubits_for, Complex64};
use crate::qmap::complex_tensor_square;
use crate::rng::stream;

const NORM_TOL: f64 = 1e-12;

/// Unit-norm amplitude vector of length `2^qubits`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidInput(format!("state length {} is not a power of two", amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Normalise a real vector and zero-pad it to the next power of two.
    pub fn from_real(x: &[f64]) -> Result<Self> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::UnencodableOrigin);
        }
        let dim = x.len().next_power_of_two();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (a, v) in amps.iter_mut().zip(x) {
            *a = Complex64::new(v / norm, 0.0);
        }
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> usize {
        qubits_for(self.amps.len())
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Which input convention amplitude encoding uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplitudeVariant {
    /// Inputs used as given; the origin cannot be encoded.
    ZeroOne,
    /// Bits remapped `b -> 2b - 1` before normalising.
    PlusMinus,
}

/// Amplitude encoding: `x / |x|`, zero-padded to the next power of two.
pub fn amplitude_encode(x: &[f64], variant: AmplitudeVariant) -> Result<StateVector> {
    match variant {
        AmplitudeVariant::ZeroOne => StateVector::from_real(x),
        AmplitudeVariant::PlusMinus => {
            let mapped: Vec<f64> = x.iter().map(|b| 2.0 * b - 1.0).collect();
            StateVector::from_real(&mapped)
        }
    }
}

fn check_bits(x: &[f64]) -> Result<()> {
    match x.iter().find(|&&v| v != 0.0 && v != 1.0) {
        Some(&v) => Err(Error::NonBinary(v)),
        None => Ok(()),
    }
}

/// Computational basis state `|x>` on `n` qubits.
pub fn basis_encode(x: &[f64]) -> Result<StateVector> {
    check_bits(x)?;
    let index = x.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    Ok(StateVector::basis(1 << x.len(), index))
}

/// In-place Walsh-Hadamard transform, normalised so it is unitary.
fn hadamard_all(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = (a + b) * FRAC_1_SQRT_2;
                v[i + h] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        h *= 2;
    }
}

/// Phase angle of the ZZ diagonal on basis state `z`.
fn zz_phase(x: &[f64], z: usize) -> f64 {
    let n = x.len();
    let s: Vec<f64> = (0..n).map(|k| if (z >> (n - 1 - k)) & 1 == 1 { -1.0 } else { 1.0 }).collect();
    let mut phase: f64 = x.iter().zip(&s).map(|(xk, sk)| xk * sk).sum();
    for k in 0..n {
        for l in k + 1..n {
            phase += (PI - x[k]) * (PI - x[l]) * s[k] * s[l];
        }
    }
    phase
}

/// Second-order Pauli-Z feature map with two repetitions:
/// `(U_phi H^n)^2 |0...0>` with single angles `x_k` and pair angles
/// `(pi - x_k)(pi - x_l)` over every pair.
pub fn zz_encode(x: &[f64]) -> StateVector {
    let dim = 1usize << x.len();
    let diag: Vec<Complex64> = (0..dim).map(|z| Complex64::from_polar(1.0, zz_phase(x, z))).collect();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0);
    for _ in 0..2 {
        hadamard_all(&mut psi);
        for (a, d) in psi.iter_mut().zip(&diag) {
            *a *= d;
        }
    }
    StateVector { amps: psi }
}

/// Width of the random ReLU layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtWidth {
    /// `n` hidden units, stored on `ceil(log2 n)` qubits.
    Linear,
    /// `2^n` hidden units, stored on `n` qubits.
    Exponential,
}

/// A fixed random layer `x -> ReLU(Wx + b)` with standard normal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RtLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl RtLayer {
    pub fn new(n: usize, width: RtWidth, seed: u64) -> Self {
        let out = match width {
            RtWidth::Linear => n,
            RtWidth::Exponential => 1 << n,
        };
        let mut rng = stream(seed, "rt-layer", n as u64);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let weights = (0..out).map(|_| (0..n).map(|_| normal()).collect()).collect();
        let bias = (0..out).map(|_| normal()).collect();
        Self { weights, bias }
    }

    pub fn from_parts(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Self {
        Self { weights, bias }
    }

    pub fn hidden(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b).max(0.0))
            .collect()
    }

    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        StateVector::from_real(&self.hidden(x))
    }
}

/// Random-transform encoding with a freshly seeded layer.
pub fn rt_encode(x: &[f64], width: RtWidth, seed: u64) -> Result<StateVector> {
    RtLayer::new(x.len(), width, seed).encode(x)
}

/// `x` followed by the one-hot vector (length `n + 1`) of its Hamming weight.
pub fn parity_augment_encode(x: &[f64]) -> Result<Vec<f64>> {
    check_bits(x)?;
    let weight = x.iter().sum::<f64>() as usize;
    let mut out = x.to_vec();
    out.extend((0..=x.len()).map(|k| if k == weight { 1.0 } else { 0.0 }));
    Ok(out)
}

/// Componentwise square root of a probability vector.
pub fn sqrt_amplitude_encode(x: &[f64]) -> Result<StateVector> {
    if let Some(&v) = x.iter().find(|&&v| v < 0.0) {
        return Err(Error::InvalidInput(format!("negative entry {v}")));
    }
    let total: f64 = x.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("entries sum to {total}, not 1")));
    }
    let dim = x.len().next_power_of_two();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v.sqrt(), 0.0);
    }
    StateVector::new(amps)
}

/// Encoding choice for a whole dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Amplitude01,
    AmplitudePm1,
    Basis,
    Zz,
    Rt { width: RtWidth, seed: u64 },
    Classical,
    SqrtAmplitude,
    ParityAugmented,
}

impl Encoding {
    pub fn tag(&self) -> &'static str {
        match self {
            Encoding::Amplitude01 => "amplitude01",
            Encoding::AmplitudePm1 => "amplitudePM1",
            Encoding::Basis => "basis",
            Encoding::Zz => "zz",
            Encoding::Rt { width: RtWidth::Linear, .. } => "rt-n",
            Encoding::Rt { width: RtWidth::Exponential, .. } => "rt-2n",
            Encoding::Classical => "classical",
            Encoding::SqrtAmplitude => "sqrt-amplitude",
            Encoding::ParityAugmented => "parity-augmented",
        }
    }

    /// Real-vector embeddings consumed by classical models.
    pub fn is_classical(&self) -> bool {
        matches!(self, Encoding::Classical | Encoding::ParityAugmented)
    }

    /// Encode a single input.
    pub fn embed(&self, x: &[f64]) -> Result<Embedding> {
        Ok(match *self {
            Encoding::Amplitude01 => Embedding::State(amplitude_encode(x, AmplitudeVariant::ZeroOne)?),
            Encoding::AmplitudePm1 => Embedding::State(amplitude_encode(x, AmplitudeVariant::PlusMinus)?),
            Encoding::Basis => Embedding::State(basis_encode(x)?),
            Encoding::Zz => Embedding::State(zz_encode(x)),
            Encoding::Rt { width, seed } => Embedding::State(rt_encode(x, width, seed)?),
            Encoding::Classical => Embedding::Real(x.to_vec()),
            Encoding::SqrtAmplitude => {
                let total: f64 = x.iter().sum();
                if total == 0.0 {
                    return Err(Error::UnencodableOrigin);
                }
                let p: Vec<f64> = x.iter().map(|v| v / total).collect();
                Embedding::State(sqrt_amplitude_encode(&p)?)
            }
            Encoding::ParityAugmented => Embedding::Real(parity_augment_encode(x)?),
        })
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    /// Parses the tags written by [`Encoding::tag`] plus a few aliases.
    /// Random-transform encodings get seed 0; use [`Encoding::with_seed`] to change it.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "amplitude" | "amplitude01" => Encoding::Amplitude01,
            "amplitude-pm1" | "amplitudePM1" => Encoding::AmplitudePm1,
            "basis" => Encoding::Basis,
            "zz" => Encoding::Zz,
            "rt-n" | "rt" => Encoding::Rt { width: RtWidth::Linear, seed: 0 },
            "rt-2n" => Encoding::Rt { width: RtWidth::Exponential, seed: 0 },
            "classical" => Encoding::Classical,
            "sqrt-amplitude" => Encoding::SqrtAmplitude,
            "parity-augmented" => Encoding::ParityAugmented,
            other => return Err(Error::Parse(format!("unknown encoding {other:?}"))),
        })
    }
}

impl Encoding {
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Encoding::Rt { width, .. } => Encoding::Rt { width, seed },
            other => other,
        }
    }
}

/// One encoded data point.
#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    State(StateVector),
    Real(Vec<f64>),
}

impl Embedding {
    pub fn dim(&self) -> usize {
        match self {
            Embedding::State(s) => s.dim(),
            Embedding::Real(v) => v.len(),
        }
    }

    /// Features seen by the linear model: `x ⊛ x` for states, the raw vector otherwise.
    pub fn linear_features(&self) -> Vec<f64> {
        match self {
            Embedding::State(s) => complex_tensor_square(s.amps()),
            Embedding::Real(v) => v.clone(),
        }
    }

    pub fn state(&self) -> Option<&StateVector> {
        match self {
            Embedding::State(s) => Some(s),
            Embedding::Real(_) => None,
        }
    }

    fn as_complex(&self) -> Vec<Complex64> {
        match self {
            Embedding::State(s) => s.amps().to_vec(),
            Embedding::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

/// Encoded inputs keyed by their input index.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedDataset {
    pub encoding: Encoding,
    /// Qubit count of the states (0 for classical embeddings).
    pub qubits: usize,
    /// Raw input dimension.
    pub n: usize,
    /// Input index of each point, ascending.
    pub indices: Vec<usize>,
    pub points: Vec<Embedding>,
    /// Inputs the encoding could not represent.
    pub dropped: Vec<usize>,
}

impl EncodedDataset {
    /// Encode all `2^n` Boolean inputs, dropping the ones the encoding cannot represent.
    pub fn boolean(encoding: Encoding, n: usize) -> Result<Self> {
        let inputs: Vec<Vec<f64>> = (0..1usize << n)
            .map(|i| index_to_input(i, n).map(|b| b.into_iter().map(f64::from).collect()))
            .collect::<Result<_>>()?;
        Self::from_inputs(encoding, &inputs)
    }

    /// Encode arbitrary real inputs; input `i` gets index `i`.
    pub fn from_inputs(encoding: Encoding, inputs: &[Vec<f64>]) -> Result<Self> {
        let n = inputs.first().map_or(0, Vec::len);
        // build the random layer once rather than once per point
        let rt = match encoding {
            Encoding::Rt { width, seed } => Some(RtLayer::new(n, width, seed)),
            _ => None,
        };
        let (mut indices, mut points, mut dropped) = (Vec::new(), Vec::new(), Vec::new());
        for (i, x) in inputs.iter().enumerate() {
            let embedded = match &rt {
                Some(layer) => layer.encode(x).map(Embedding::State),
                None => encoding.embed(x),
            };
            match embedded {
                Ok(e) => {
                    indices.push(i);
                    points.push(e);
                }
                Err(Error::UnencodableOrigin) => dropped.push(i),
                Err(e) => return Err(e),
            }
        }
        let qubits = match points.first() {
            Some(Embedding::State(s)) => s.qubits(),
            _ => 0,
        };
        Ok(Self { encoding, qubits, n, indices, points, dropped })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position of an input index among the points.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.indices.binary_search(&index).ok()
    }

    pub fn point(&self, index: usize) -> Option<&Embedding> {
        self.position(index).map(|p| &self.points[p])
    }

    pub fn states(&self) -> Option<Vec<&StateVector>> {
        self.points.iter().map(Embedding::state).collect()
    }

    /// Linear-model feature rows in point order.
    pub fn linear_features(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(Embedding::linear_features).collect()
    }

    /// CSV text: a `encoding,qubits,n` header line, its values, then
    /// `index,re0,im0,re1,im1,...` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("encoding,qubits,n\n{},{},{}\n", self.encoding.tag(), self.qubits, self.n);
        for (i, p) in self.indices.iter().zip(&self.points) {
            out.push_str(&i.to_string());
            for a in p.as_complex() {
                out.push(',');
                out.push_str(&fixed(a.re));
                out.push(',');
                out.push_str(&fixed(a.im));
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`EncodedDataset::to_csv`]. Inputs absent from the rows are
    /// reported as dropped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("encoding,qubits,n") {
            return Err(Error::Parse("missing encoding header".into()));
        }
        let meta: Vec<&str> =
            lines.next().ok_or_else(|| Error::Parse("missing metadata row".into()))?.split(',').collect();
        if meta.len() != 3 {
            return Err(Error::Parse("metadata row needs 3 fields".into()));
        }
        let encoding: Encoding = meta[0].parse()?;
        let qubits: usize = meta[1].parse().map_err(|_| Error::Parse("bad qubit count".into()))?;
        let n: usize = meta[2].parse().map_err(|_| Error::Parse("bad input size".into()))?;
        let (mut indices, mut points) = (Vec::new(), Vec::new());
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() % 2 != 1 {
                return Err(Error::Parse("amplitude row has an odd number of values".into()));
            }
            indices.push(fields[0].trim().parse().map_err(|_| Error::Parse("bad index".into()))?);
            let vals = fields[1..].iter().map(|f| parse_f64(f)).collect::<Result<Vec<_>>>()?;
            let amps: Vec<Complex64> = vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            points.push(if encoding.is_classical() {
                Embedding::Real(amps.iter().map(|a| a.re).collect())
            } else {
                Embedding::State(StateVector::new(amps)?)
            });
        }
        let dropped = if encoding.is_classical() || n >= 32 {
            Vec::new()
        } else {
            (0..1usize << n).filter(|i| indices.binary_search(i).is_err()).collect()
        };
        Ok(Self { encoding, qubits, n, indices, points, dropped })
    }
}
