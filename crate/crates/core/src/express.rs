//! Exact expressivity: can a linear model on a given feature map realise a
//! labelling with strict separation?
//!
//! Strict separation `y_i (w · h_i - z) > 0` is decided through the margin-1
//! system `y_i (w · h_i - z) >= 1`, which is feasible exactly when a strictly
//! separating `w` exists (scale any such `w` up).

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::boolean::{index_to_input, BooleanFunction, TargetSuite};
use crate::encode::{AmplitudeVariant, EncodedDataset, Encoding};
use crate::error::{Error, Result};
use crate::simplex::{feasible_point, Scalar};

/// Largest input size whose verdicts are re-derived in exact arithmetic.
pub const EXACT_MAX_N: usize = 4;

/// Outcome of a separability test.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpressibilityVerdict {
    pub expressible: bool,
    /// Weights (and bias, zero without one) that separate the data.
    pub witness: Option<Witness>,
    /// `min_i y_i (w · h_i - z)` for the witness.
    pub margin: Option<f64>,
    /// Whether the verdict was derived in exact rational arithmetic.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Witness {
    pub fn score(&self, h: &[f64]) -> f64 {
        self.weights.iter().zip(h).map(|(w, x)| w * x).sum::<f64>() - self.bias
    }
}

fn label_sign(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

fn margin_of(w: &Witness, features: &[Vec<f64>], labels: &[bool]) -> f64 {
    features.iter().zip(labels).map(|(h, &y)| label_sign(y) * w.score(h)).fold(f64::INFINITY, f64::min)
}

/// Build `[G, -G, -y, y, -I] (w+, w-, z+, z-, s) = 1` with `G_i = y_i c_i`.
fn margin_system<T: Scalar>(coords: &[Vec<T>], labels: &[bool], with_bias: bool) -> (Vec<Vec<T>>, Vec<T>) {
    let m = coords.len();
    let d = coords.first().map_or(0, Vec::len);
    let width = 2 * d + if with_bias { 2 } else { 0 } + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (c, &label)) in coords.iter().zip(labels).enumerate() {
        let y = if label { T::one() } else { -T::one() };
        let mut row = vec![T::zero(); width];
        for k in 0..d {
            let g = y.clone() * c[k].clone();
            row[d + k] = -g.clone();
            row[k] = g;
        }
        let mut col = 2 * d;
        if with_bias {
            row[col] = -y.clone();
            row[col + 1] = y;
            col += 2;
        }
        row[col + i] = -T::one();
        rows.push(row);
    }
    (rows, vec![T::one(); m])
}

fn unpack<T: Scalar>(x: &[T], d: usize, with_bias: bool) -> (Vec<T>, T) {
    let w = (0..d).map(|k| x[k].clone() - x[d + k].clone()).collect();
    let z = if with_bias { x[2 * d].clone() - x[2 * d + 1].clone() } else { T::zero() };
    (w, z)
}

/// Floating-point separability test on arbitrary real features.
///
/// The features are first expressed in an orthonormal basis of their span
/// (from the Gram matrix), so the program has at most `len(features)` weight
/// variables however wide the raw features are.
pub fn separable(features: &[Vec<f64>], labels: &[bool], with_bias: bool) -> Result<ExpressibilityVerdict> {
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), found: labels.len() });
    }
    let m = features.len();
    let gram = DMatrix::from_fn(m, m, |i, j| features[i].iter().zip(&features[j]).map(|(a, b)| a * b).sum::<f64>());
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let kept: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 1e-10 * top.max(f64::MIN_POSITIVE)).collect();
    // coordinates c_i = sqrt(lambda_k) q_ik
    let coords: Vec<Vec<f64>> =
        (0..m).map(|i| kept.iter().map(|&k| eig.eigenvalues[k].sqrt() * eig.eigenvectors[(i, k)]).collect()).collect();
    let (a, b) = margin_system(&coords, labels, with_bias);
    let Some(x) = feasible_point(&a, &b) else {
        return Ok(ExpressibilityVerdict { expressible: false, witness: None, margin: None, certified: false });
    };
    let (v, z) = unpack(&x, kept.len(), with_bias);
    // back to raw features: w = sum_i alpha_i h_i with alpha = Q_r Lambda_r^{-1/2} v
    let alpha: Vec<f64> = (0..m)
        .map(|i| kept.iter().zip(&v).map(|(&k, vk)| eig.eigenvectors[(i, k)] * vk / eig.eigenvalues[k].sqrt()).sum())
        .collect();
    let dim = features[0].len();
    let mut weights = vec![0.0; dim];
    for (h, a) in features.iter().zip(&alpha) {
        for (w, x) in weights.iter_mut().zip(h) {
            *w += a * x;
        }
    }
    let witness = Witness { weights, bias: z };
    let margin = margin_of(&witness, features, labels);
    Ok(ExpressibilityVerdict { expressible: true, witness: Some(witness), margin: Some(margin), certified: false })
}

/// Exact separability test. Returns the witness `(w, z)` when one exists.
pub fn separable_exact(
    features: &[Vec<BigRational>],
    labels: &[bool],
    with_bias: bool,
) -> Result<Option<(Vec<BigRational>, BigRational)>> {
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = features[0].len();
    let (a, b) = margin_system(features, labels, with_bias);
    Ok(feasible_point(&a, &b).map(|x| unpack(&x, d, with_bias)))
}

fn exact_verdict(features: &[Vec<BigRational>], labels: &[bool], with_bias: bool) -> Result<ExpressibilityVerdict> {
    let Some((w, z)) = separable_exact(features, labels, with_bias)? else {
        return Ok(ExpressibilityVerdict { expressible: false, witness: None, margin: None, certified: true });
    };
    // exact margin, then convert
    let margin = features
        .iter()
        .zip(labels)
        .map(|(h, &y)| {
            let s = h.iter().zip(&w).fold(BigRational::zero(), |acc, (a, b)| acc + a.clone() * b.clone()) - z.clone();
            if y {
                s
            } else {
                -s
            }
        })
        .min()
        .expect("nonempty");
    debug_assert!(margin >= BigRational::one());
    let to_f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
    let witness = Witness { weights: w.iter().map(to_f).collect(), bias: to_f(&z) };
    Ok(ExpressibilityVerdict {
        expressible: true,
        witness: Some(witness),
        margin: Some(to_f(&margin)),
        certified: true,
    })
}

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `x ⊗ x` (zero-padded to a power-of-two length), optionally divided by `|x|²`.
fn exact_tensor_square(x: &[i64], normalized: bool) -> Vec<BigRational> {
    let dim = x.len().next_power_of_two();
    let mut padded = x.to_vec();
    padded.resize(dim, 0);
    let norm2: i64 = padded.iter().map(|v| v * v).sum();
    padded
        .iter()
        .flat_map(|a| padded.iter().map(move |b| a * b))
        .map(|v| if normalized { BigRational::new(BigInt::from(v), BigInt::from(norm2)) } else { rational(v) })
        .collect()
}

/// Exact linear-model features of the Boolean inputs under `encoding`, for the
/// encodings whose features are rational. Returns the input indices kept and
/// their feature rows; `normalized = false` skips the division by `|x|²` for
/// amplitude-type encodings.
pub fn exact_boolean_features(
    encoding: Encoding,
    n: usize,
    normalized: bool,
) -> Option<(Vec<usize>, Vec<Vec<BigRational>>)> {
    let mut indices = Vec::new();
    let mut rows = Vec::new();
    for i in 0..1usize << n {
        let bits: Vec<i64> = index_to_input(i, n).ok()?.into_iter().map(i64::from).collect();
        let row = match encoding {
            Encoding::Amplitude01 | Encoding::SqrtAmplitude => {
                if bits.iter().all(|&b| b == 0) {
                    continue;
                }
                exact_tensor_square(&bits, normalized)
            }
            Encoding::AmplitudePm1 => {
                let mapped: Vec<i64> = bits.iter().map(|b| 2 * b - 1).collect();
                exact_tensor_square(&mapped, normalized)
            }
            Encoding::Basis => {
                let dim = 1usize << n;
                let mut h = vec![BigRational::zero(); dim * dim];
                h[i * dim + i] = BigRational::one();
                h
            }
            Encoding::Classical => bits.iter().map(|&b| rational(b)).collect(),
            Encoding::ParityAugmented => {
                let x: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
                crate::encode::parity_augment_encode(&x).ok()?.into_iter().map(|v| rational(v as i64)).collect()
            }
            Encoding::Zz | Encoding::Rt { .. } => return None,
        };
        indices.push(i);
        rows.push(row);
    }
    Some((indices, rows))
}

/// Can a QNN on this encoded dataset realise `f` (threshold at zero, or at
/// a free bias when `with_bias`)?
///
/// Boolean datasets with `n <= EXACT_MAX_N` and rational features get an
/// exact verdict; everything else uses the floating-point program.
pub fn is_expressible(dataset: &EncodedDataset, f: &BooleanFunction, with_bias: bool) -> Result<ExpressibilityVerdict> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels: Vec<bool> = dataset.indices.iter().map(|&i| f.label(i)).collect();
    if dataset.n == f.n() && f.n() <= EXACT_MAX_N {
        if let Some((indices, rows)) = exact_boolean_features(dataset.encoding, f.n(), true) {
            if indices == dataset.indices {
                return exact_verdict(&rows, &labels, with_bias);
            }
        }
    }
    separable(&dataset.linear_features(), &labels, with_bias)
}

/// Linear classifier directly on raw inputs (input `i` carries label `f(i)`).
pub fn perceptron_expressible(
    inputs: &[Vec<f64>],
    f: &BooleanFunction,
    with_bias: bool,
) -> Result<ExpressibilityVerdict> {
    if inputs.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: f.len(), found: inputs.len() });
    }
    let labels: Vec<bool> = f.bits().to_vec();
    let integral = inputs.iter().flatten().all(|v| v.fract() == 0.0 && v.abs() < 1e15);
    if f.n() <= EXACT_MAX_N && integral {
        let rows: Vec<Vec<BigRational>> =
            inputs.iter().map(|x| x.iter().map(|&v| rational(v as i64)).collect()).collect();
        return exact_verdict(&rows, &labels, with_bias);
    }
    separable(inputs, &labels, with_bias)
}

/// One row of the verdict table.
#[derive(Clone, Debug, PartialEq)]
pub struct VerdictRow {
    pub function_index: usize,
    pub generator_tag: String,
    pub verdict: ExpressibilityVerdict,
}

/// Verdicts for every suite member, computed in parallel.
pub fn suite_verdicts(
    suite: &TargetSuite,
    verdict: impl Fn(&BooleanFunction) -> Result<ExpressibilityVerdict> + Sync,
) -> Result<Vec<VerdictRow>> {
    suite
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            Ok(VerdictRow { function_index: i, generator_tag: e.generator.to_string(), verdict: verdict(&e.function)? })
        })
        .collect()
}

/// Number of suite functions the encoded QNN can express.
pub fn count_expressible(dataset: &EncodedDataset, suite: &TargetSuite, with_bias: bool) -> Result<usize> {
    let rows = suite_verdicts(suite, |f| is_expressible(dataset, f, with_bias))?;
    Ok(rows.iter().filter(|r| r.verdict.expressible).count())
}

/// CSV with header `function_index,generator_tag,expressible,margin`.
pub fn verdicts_to_csv(rows: &[VerdictRow]) -> String {
    let mut out = String::from("function_index,generator_tag,expressible,margin\n");
    for r in rows {
        let margin = r.verdict.margin.map(crate::num::fixed).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.function_index, r.generator_tag, r.verdict.expressible, margin));
    }
    out
}

/// Maximum number of dichotomies of `points` points in general position that a
/// linear classifier with `features` weights can realise.
pub fn cover_count(points: u64, features: u64) -> BigUint {
    assert!(points >= 1 && features >= 1);
    if features >= points {
        return BigUint::one() << points;
    }
    let mut total = BigUint::zero();
    let mut binom = BigUint::one();
    for k in 0..features {
        total += &binom;
        binom = binom * BigUint::from(points - 1 - k) / BigUint::from(k + 1);
    }
    total * 2u32
}

/// The amplitude-encoding features of Boolean inputs in floating point,
/// optionally without normalisation. Used for the unnormalised variants of the
/// inexpressibility results.
pub fn amplitude_features(n: usize, variant: AmplitudeVariant, normalized: bool) -> (Vec<usize>, Vec<Vec<f64>>) {
    let encoding = match variant {
        AmplitudeVariant::ZeroOne => Encoding::Amplitude01,
        AmplitudeVariant::PlusMinus => Encoding::AmplitudePm1,
    };
    let (indices, rows) = exact_boolean_features(encoding, n, normalized).expect("rational encoding");
    let rows = rows.iter().map(|r| r.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()).collect();
    (indices, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::{all_inputs, generate_target_suite, parity};
    use crate::qmap::{complex_tensor_square, tpp_eval, TppWeights};

    fn raw_inputs(n: usize) -> Vec<Vec<f64>> {
        all_inputs(n).into_iter().map(|x| x.into_iter().map(f64::from).collect()).collect()
    }

    #[test]
    fn xor_on_amplitude_encoding() {
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 2).unwrap();
        let xor = parity(2);
        let v = is_expressible(&ds, &xor, false).unwrap();
        assert!(v.expressible && v.certified);
        let w = v.witness.unwrap();
        assert!(v.margin.unwrap() >= 1.0 - 1e-12);
        for (h, &i) in ds.linear_features().iter().zip(&ds.indices) {
            assert_eq!(w.score(h) > 0.0, xor.label(i));
        }
        // the hand-built witness [1, -1, -1, 1]
        let hand = TppWeights::new(2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        for (p, &i) in ds.points.iter().zip(&ds.indices) {
            let h = complex_tensor_square(p.state().unwrap().amps());
            assert_eq!(tpp_eval(&hand, &h).unwrap() > 0.0, xor.label(i));
        }
    }

    #[test]
    fn parity_not_expressible_on_amplitude_n3() {
        let f = parity(3);
        for (variant, normalized, bias) in [
            (AmplitudeVariant::ZeroOne, true, false),
            (AmplitudeVariant::ZeroOne, false, false),
            (AmplitudeVariant::PlusMinus, true, true),
        ] {
            let enc = if variant == AmplitudeVariant::ZeroOne { Encoding::Amplitude01 } else { Encoding::AmplitudePm1 };
            let (idx, rows) = exact_boolean_features(enc, 3, normalized).unwrap();
            let labels: Vec<bool> = idx.iter().map(|&i| f.label(i)).collect();
            assert!(separable_exact(&rows, &labels, bias).unwrap().is_none());
        }
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        let v = is_expressible(&ds, &f, false).unwrap();
        assert!(!v.expressible && v.certified);
    }

    #[test]
    fn constant_zero_always_expressible() {
        for enc in [Encoding::Amplitude01, Encoding::Basis, Encoding::Zz] {
            let ds = EncodedDataset::boolean(enc, 3).unwrap();
            let v = is_expressible(&ds, &BooleanFunction::constant(3, false), false).unwrap();
            assert!(v.expressible);
        }
    }

    #[test]
    fn perceptron_examples() {
        let x = raw_inputs(2);
        assert!(!perceptron_expressible(&x, &parity(2), true).unwrap().expressible);
        let and: BooleanFunction = "0001".parse().unwrap();
        let v = perceptron_expressible(&x, &and, true).unwrap();
        assert!(v.expressible && v.certified);
        assert!(!perceptron_expressible(&x, &and, false).unwrap().expressible);
    }

    #[test]
    fn float_and_exact_agree_on_all_n2_functions() {
        for enc in [Encoding::Amplitude01, Encoding::AmplitudePm1, Encoding::Basis, Encoding::Classical] {
            let ds = EncodedDataset::boolean(enc, 2).unwrap();
            let feats = ds.linear_features();
            for code in 0..16usize {
                let f = BooleanFunction::from_fn(2, |i| (code >> i) & 1 == 1);
                let labels: Vec<bool> = ds.indices.iter().map(|&i| f.label(i)).collect();
                for bias in [false, true] {
                    let float = separable(&feats, &labels, bias).unwrap();
                    let exact = is_expressible(&ds, &f, bias).unwrap();
                    assert_eq!(float.expressible, exact.expressible, "{enc} {f} bias={bias}");
                    if let Some(w) = float.witness {
                        assert!(margin_of(&w, &feats, &labels) > 1.0 - 1e-7);
                    }
                }
            }
        }
    }

    /// Random search for separating weights; only ever proves expressibility.
    fn random_search(features: &[Vec<f64>], labels: &[bool], tries: usize, seed: u64) -> bool {
        use rand::Rng as _;
        let mut rng = crate::rng::stream(seed, "search", 0);
        let d = features[0].len();
        (0..tries).any(|_| {
            let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            features.iter().zip(labels).all(|(h, &y)| {
                let s: f64 = h.iter().zip(&w).map(|(a, b)| a * b).sum();
                if y {
                    s > 0.0
                } else {
                    s < 0.0
                }
            })
        })
    }

    #[test]
    fn random_search_never_beats_the_program() {
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 2).unwrap();
        let feats = ds.linear_features();
        for code in 0..16usize {
            let f = BooleanFunction::from_fn(2, |i| (code >> i) & 1 == 1);
            let labels: Vec<bool> = ds.indices.iter().map(|&i| f.label(i)).collect();
            let v = is_expressible(&ds, &f, false).unwrap();
            if random_search(&feats, &labels, 20_000, code as u64) {
                assert!(v.expressible);
            }
        }
    }

    #[test]
    fn basis_encoding_expresses_everything() {
        let ds = EncodedDataset::boolean(Encoding::Basis, 5).unwrap();
        let suite = generate_target_suite(5, 3);
        assert_eq!(count_expressible(&ds, &suite, false).unwrap(), suite.len());
    }

    #[test]
    fn removing_points_preserves_expressibility() {
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 4).unwrap();
        let feats = ds.linear_features();
        let suite = generate_target_suite(4, 1);
        for e in suite.entries.iter().take(30) {
            let labels: Vec<bool> = ds.indices.iter().map(|&i| e.function.label(i)).collect();
            if separable(&feats, &labels, false).unwrap().expressible {
                assert!(separable(&feats[1..], &labels[1..], false).unwrap().expressible);
                assert!(separable(&feats[..feats.len() - 2], &labels[..labels.len() - 2], false).unwrap().expressible);
            }
        }
    }

    #[test]
    fn cover_count_examples() {
        assert_eq!(cover_count(4, 4), BigUint::from(16u32));
        assert_eq!(cover_count(4, 2), BigUint::from(8u32));
        // direct binomial oracle
        let direct = |n: u64, k: u64| -> BigUint {
            let mut s = BigUint::zero();
            for j in 0..k {
                let mut c = BigUint::one();
                for t in 0..j {
                    c = c * BigUint::from(n - 1 - t) / BigUint::from(t + 1);
                }
                s += c;
            }
            s * 2u32
        };
        assert_eq!(cover_count(127, 49), direct(127, 49));
        let exponent = 343.0 + 49.0 * std::f64::consts::E.log2() + 1.0;
        for points in [127u64, 128] {
            let bits = cover_count(points, 49).bits() as f64;
            assert!(bits <= exponent);
        }
    }

    #[test]
    fn verdict_csv_header() {
        let suite = generate_target_suite(3, 0);
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        let rows = suite_verdicts(&suite, |f| is_expressible(&ds, f, false)).unwrap();
        let csv = verdicts_to_csv(&rows);
        assert!(csv.starts_with("function_index,generator_tag,expressible,margin\n"));
        assert_eq!(csv.lines().count(), suite.len() + 1);
    }
}
