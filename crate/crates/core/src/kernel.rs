//! Kernels of encoded data: quantum overlap kernels, the arc-cosine FCN
//! recursion, ridgeless regression, spectra under the uniform input measure,
//! task-model alignment and learning curves.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::encode::StateVector;
use crate::error::{Error, Result};
use crate::num::fixed;
use crate::rng::stream;

/// Relative cutoff below which eigenvalues count as zero (rank and pseudoinverse).
pub const RANK_CUTOFF: f64 = 1e-10;

/// Symmetric positive semidefinite Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    k: DMatrix<f64>,
}

impl KernelMatrix {
    /// Wraps `k` after checking symmetry (1e-12) and positive semidefiniteness (-1e-9).
    pub fn new(k: DMatrix<f64>) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::DimensionMismatch { expected: k.nrows(), found: k.ncols() });
        }
        let asym = (&k - k.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidInput(format!("kernel asymmetric by {asym:e}")));
        }
        let kernel = Self { k };
        let min = kernel.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::InvalidInput(format!("kernel has eigenvalue {min:e}")));
        }
        Ok(kernel)
    }

    fn new_unchecked(k: DMatrix<f64>) -> Self {
        Self { k }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn size(&self) -> usize {
        self.k.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.size() == 0 {
            return 0.0;
        }
        self.k.clone().symmetric_eigenvalues().min()
    }

    /// Sub-block with the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.k[(rows[i], cols[j])])
    }
}

fn gram(len: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..len).into_par_iter().map(|i| (0..=i).map(|j| entry(i, j)).collect()).collect();
    let mut k = DMatrix::zeros(len, len);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn check_dims(states: &[&StateVector]) -> Result<()> {
    if let Some(first) = states.first() {
        if let Some(bad) = states.iter().find(|s| s.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: bad.dim() });
        }
    }
    Ok(())
}

/// `K_ij = |<x_i|x_j>|²`.
pub fn quantum_kernel(states: &[&StateVector]) -> Result<KernelMatrix> {
    check_dims(states)?;
    Ok(KernelMatrix::new_unchecked(gram(states.len(), |i, j| states[i].inner(states[j]).norm_sqr())))
}

/// Plain dot-product kernel of real feature vectors.
pub fn linear_kernel(features: &[Vec<f64>]) -> Result<KernelMatrix> {
    if let Some(first) = features.first() {
        if let Some(bad) = features.iter().find(|f| f.len() != first.len()) {
            return Err(Error::DimensionMismatch { expected: first.len(), found: bad.len() });
        }
    }
    Ok(KernelMatrix::new_unchecked(gram(features.len(), |i, j| {
        features[i].iter().zip(&features[j]).map(|(a, b)| a * b).sum()
    })))
}

/// One layer of the ReLU arc-cosine recursion on a normalised kernel value.
pub fn fcn_kernel_level(a: f64) -> f64 {
    let a = a.clamp(-1.0, 1.0);
    ((1.0 - a * a).sqrt() + (std::f64::consts::PI - a.acos()) * a) / std::f64::consts::PI
}

/// `l` layers of the recursion started from the overlap `Re <x_i|x_j>`.
///
/// Where overlaps are non-negative (amplitude encoded Boolean data) this is
/// `sqrt(K_Q)`. On signed data `|<x_i|x_j>|` is generally not positive
/// semidefinite, while the real part of a Gram matrix always is.
pub fn quantum_fcn_kernel(states: &[&StateVector], layers: usize) -> Result<KernelMatrix> {
    check_dims(states)?;
    let k = gram(states.len(), |i, j| {
        let mut a = states[i].inner(states[j]).re;
        for _ in 0..layers {
            a = fcn_kernel_level(a);
        }
        a
    });
    Ok(KernelMatrix::new_unchecked(k))
}

/// Moore-Penrose pseudoinverse of a symmetric matrix, dropping eigenvalues
/// below `RANK_CUTOFF` times the largest magnitude.
pub fn symmetric_pinv(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = k.clone().symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let inv = DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| if l.abs() > RANK_CUTOFF * top && l != 0.0 { 1.0 / l } else { 0.0 }),
    );
    let scaled = &eig.eigenvectors * DMatrix::from_diagonal(&inv);
    scaled * eig.eigenvectors.transpose()
}

/// `K_cross · pinv(K_train) · y`.
pub fn ridgeless_regression(k_train: &DMatrix<f64>, y: &[f64], k_cross: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !k_train.is_square() || k_train.nrows() != y.len() {
        return Err(Error::DimensionMismatch { expected: k_train.nrows(), found: y.len() });
    }
    if k_cross.ncols() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: k_cross.ncols() });
    }
    let alpha = symmetric_pinv(k_train) * DVector::from_column_slice(y);
    Ok((k_cross * alpha).iter().copied().collect())
}

/// Train and test classification error of ridgeless regression on ±1 labels.
///
/// `labels`, `train` and `test` index rows of `k`.
pub fn ridgeless_errors(k: &KernelMatrix, labels: &[bool], train: &[usize], test: &[usize]) -> Result<(f64, f64)> {
    if labels.len() != k.size() {
        return Err(Error::DimensionMismatch { expected: k.size(), found: labels.len() });
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let y: Vec<f64> = train.iter().map(|&i| if labels[i] { 1.0 } else { -1.0 }).collect();
    let pinv_y = symmetric_pinv(&k.select(train, train)) * DVector::from_column_slice(&y);
    let error = |rows: &[usize]| -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let pred = k.select(rows, train) * &pinv_y;
        rows.iter().zip(pred.iter()).filter(|(&i, &p)| (p > 0.0) != labels[i]).count() as f64 / rows.len() as f64
    };
    Ok((error(train), error(test)))
}

/// Eigen-decomposition of the integral operator `(1/M) K` under the uniform
/// measure on the `M` inputs.
#[derive(Clone, Debug)]
pub struct KernelSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenfunction of `eigenvalues[k]`, normalised so
    /// that `(1/M) Σ_x e_k(x)² = 1`.
    pub eigenvectors: DMatrix<f64>,
}

impl KernelSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Count of eigenvalues above `RANK_CUTOFF` times the largest.
    pub fn rank(&self) -> usize {
        let top = self.eigenvalues.first().copied().unwrap_or(0.0);
        self.eigenvalues.iter().filter(|&&l| l > RANK_CUTOFF * top).count()
    }

    /// Inner product of two functions on the input set under the uniform measure.
    fn inner(a: impl Iterator<Item = f64>, b: &[f64]) -> f64 {
        a.zip(b).map(|(x, y)| x * y).sum::<f64>() / b.len() as f64
    }
}

pub fn integral_operator_spectrum(k: &KernelMatrix) -> KernelSpectrum {
    let m = k.size();
    if m == 0 {
        return KernelSpectrum { eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(0, 0) };
    }
    let eig = (k.matrix() / m as f64).symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = (m as f64).sqrt();
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])] * scale);
    KernelSpectrum { eigenvalues, eigenvectors }
}

/// Cumulative `TA(k) = Σ_{i<=k} <e_i, f>² / <f, f>` for `k = 1..=M`.
pub fn task_model_alignment(spectrum: &KernelSpectrum, target: &[f64]) -> Result<Vec<f64>> {
    if target.len() != spectrum.eigenvectors.nrows() {
        return Err(Error::DimensionMismatch { expected: spectrum.eigenvectors.nrows(), found: target.len() });
    }
    let norm = KernelSpectrum::inner(target.iter().copied(), target);
    if norm == 0.0 {
        return Err(Error::InvalidInput("zero target".into()));
    }
    let mut total = 0.0;
    Ok((0..spectrum.len())
        .map(|k| {
            let c = KernelSpectrum::inner(spectrum.eigenvectors.column(k).iter().copied(), target);
            total += c * c / norm;
            total
        })
        .collect())
}

/// CSV `k,eigenvalue,ta_cumulative` with `k` counted from 1.
pub fn spectrum_to_csv(spectrum: &KernelSpectrum, ta: &[f64]) -> String {
    let mut out = String::from("k,eigenvalue,ta_cumulative\n");
    for (k, (l, t)) in spectrum.eigenvalues.iter().zip(ta).enumerate() {
        out.push_str(&format!("{},{},{}\n", k + 1, fixed(*l), fixed(*t)));
    }
    out
}

/// Size of the held-out set per learning-curve trial.
pub const HELD_OUT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub m: usize,
    pub mean_mse: f64,
    pub stderr: f64,
}

/// Mean generalisation MSE of ridgeless regression for each training size.
///
/// Each trial draws `m` training points uniformly without replacement and
/// up to `HELD_OUT` disjoint test points. When no points are left over the
/// loss is measured on the whole input set.
pub fn learning_curve(
    k: &KernelMatrix,
    target: &[f64],
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let total = k.size();
    if target.len() != total {
        return Err(Error::DimensionMismatch { expected: total, found: target.len() });
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    sizes
        .iter()
        .map(|&m| {
            if m == 0 || m > total {
                return Err(Error::TooManyTrainingPoints { requested: m, available: total });
            }
            let losses: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(seed, &format!("curve-{m}"), t as u64);
                    let mut order: Vec<usize> = (0..total).collect();
                    order.shuffle(&mut rng);
                    let (train, rest) = order.split_at(m);
                    let test: Vec<usize> =
                        if rest.is_empty() { (0..total).collect() } else { rest[..rest.len().min(HELD_OUT)].to_vec() };
                    let y: Vec<f64> = train.iter().map(|&i| target[i]).collect();
                    let pred = ridgeless_regression(&k.select(train, train), &y, &k.select(&test, train))
                        .expect("shapes match by construction");
                    test.iter().zip(&pred).map(|(&i, p)| (p - target[i]).powi(2)).sum::<f64>() / test.len() as f64
                })
                .collect();
            let mean = losses.iter().sum::<f64>() / trials as f64;
            let var = if trials > 1 {
                losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
            } else {
                0.0
            };
            Ok(CurvePoint { m, mean_mse: mean, stderr: (var / trials as f64).sqrt() })
        })
        .collect()
}

/// CSV `m,mean_mse,stderr`.
pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("m,mean_mse,stderr\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.m, fixed(p.mean_mse), fixed(p.stderr)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::parity;
    use crate::encode::{EncodedDataset, Encoding};
    use crate::num::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn states(ds: &EncodedDataset) -> Vec<&StateVector> {
        ds.states().unwrap()
    }

    #[test]
    fn quantum_kernel_examples() {
        let a = StateVector::basis(2, 0);
        let b = StateVector::basis(2, 1);
        let plus = StateVector::new(vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let k = quantum_kernel(&[&a, &b]).unwrap();
        assert_eq!(k.matrix(), &DMatrix::identity(2, 2));
        let k = quantum_kernel(&[&a, &a]).unwrap();
        assert_eq!(k.matrix(), &DMatrix::from_element(2, 2, 1.0));
        let k = quantum_kernel(&[&a, &plus]).unwrap();
        assert!((k.matrix()[(0, 1)] - 0.5).abs() < 1e-15);
        assert!(quantum_kernel(&[&a, &StateVector::basis(4, 0)]).is_err());
    }

    #[test]
    fn fcn_level_fixed_points_and_monotone() {
        assert!((fcn_kernel_level(1.0) - 1.0).abs() < 1e-12);
        assert!(fcn_kernel_level(-1.0).abs() < 1e-12);
        assert!((fcn_kernel_level(0.0) - 1.0 / PI).abs() < 1e-12);
        let mut prev = -1.0;
        for i in 0..=10_000 {
            let v = fcn_kernel_level(-1.0 + 2.0 * i as f64 / 10_000.0);
            assert!((0.0..=1.0).contains(&v) && v >= prev);
            prev = v;
        }
    }

    #[test]
    fn fcn_kernel_on_orthogonal_and_identical() {
        let a = StateVector::basis(2, 0);
        let b = StateVector::basis(2, 1);
        let k = quantum_fcn_kernel(&[&a, &b, &a], 1).unwrap();
        assert!((k.matrix()[(0, 1)] - 1.0 / PI).abs() < 1e-15);
        assert!((k.matrix()[(0, 2)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fcn_kernel_psd_on_signed_states() {
        let mut rng = crate::rng::stream(4, "signed-states", 0);
        use rand::Rng;
        let states: Vec<StateVector> = (0..40)
            .map(|_| StateVector::from_real(&(0..8).map(|_| rng.random::<f64>() - 0.5).collect::<Vec<_>>()).unwrap())
            .collect();
        let refs: Vec<&StateVector> = states.iter().collect();
        let k = quantum_fcn_kernel(&refs, 1).unwrap();
        assert!(KernelMatrix::new(k.matrix().clone()).is_ok());
        // the absolute-overlap start value is not a kernel on such data
        let abs = quantum_kernel(&refs).unwrap().matrix().map(|v| fcn_kernel_level(v.sqrt()));
        assert!(abs.symmetric_eigenvalues().min() < -1e-3);
    }

    #[test]
    fn ridgeless_errors_interpolate_training_set() {
        let ds = EncodedDataset::boolean(Encoding::Basis, 3).unwrap();
        let k = quantum_kernel(&states(&ds)).unwrap();
        let labels: Vec<bool> = (0..8).map(|i| i % 3 == 0).collect();
        let (train, test) = ridgeless_errors(&k, &labels, &[0, 1, 2, 3], &[4, 5, 6, 7]).unwrap();
        assert_eq!(train, 0.0);
        // zero predictions on unseen basis states count as class 0
        assert_eq!(test, 0.25);
    }

    #[test]
    fn ranks_at_n7() {
        let amp = EncodedDataset::boolean(Encoding::Amplitude01, 7).unwrap();
        let s = integral_operator_spectrum(&quantum_kernel(&states(&amp)).unwrap());
        assert_eq!(s.rank(), 28);
        let normalized: Vec<Vec<f64>> = amp
            .indices
            .iter()
            .map(|&i| {
                let x: Vec<f64> = (0..7).map(|k| ((i >> (6 - k)) & 1) as f64).collect();
                let norm = x.iter().sum::<f64>().sqrt();
                x.iter().map(|v| v / norm).collect()
            })
            .collect();
        assert_eq!(integral_operator_spectrum(&linear_kernel(&normalized).unwrap()).rank(), 7);
        let basis = EncodedDataset::boolean(Encoding::Basis, 7).unwrap();
        let s = integral_operator_spectrum(&quantum_kernel(&states(&basis)).unwrap());
        assert_eq!(s.rank(), 128);
        let (lo, hi) = (s.eigenvalues[127], s.eigenvalues[0]);
        assert!((hi - lo) / hi <= 1e-9);
    }

    #[test]
    fn spectrum_trace_and_orthonormality() {
        let ds = EncodedDataset::boolean(Encoding::Zz, 3).unwrap();
        let k = quantum_kernel(&states(&ds)).unwrap();
        let s = integral_operator_spectrum(&k);
        let m = k.size() as f64;
        assert!((s.eigenvalues.iter().sum::<f64>() - k.matrix().trace() / m).abs() < 1e-9);
        let gram = s.eigenvectors.transpose() * &s.eigenvectors / m;
        assert!((gram - DMatrix::identity(k.size(), k.size())).amax() < 1e-9);
    }

    #[test]
    fn alignment_properties() {
        // n = 3 perceptron kernel on normalised inputs minus origin, parity target
        let ds = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        let feats: Vec<Vec<f64>> =
            ds.states().unwrap().iter().map(|s| s.amps()[..3].iter().map(|a| a.re).collect()).collect();
        let s = integral_operator_spectrum(&linear_kernel(&feats).unwrap());
        let f = parity(3);
        let target: Vec<f64> = ds.indices.iter().map(|&i| f.sign(i)).collect();
        let ta = task_model_alignment(&s, &target).unwrap();
        assert!(ta.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert_eq!(s.rank(), 3);
        assert!(ta[s.rank() - 1] < 1.0 - 1e-6);
        assert!((ta.last().unwrap() - 1.0).abs() < 1e-9);
        // explicit oracle: projection of the target onto the column space of the features
        let x = DMatrix::from_fn(7, 3, |i, j| feats[i][j]);
        let y = DVector::from_column_slice(&target);
        let proj = &x * (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * &y;
        let expected = proj.norm_squared() / y.norm_squared();
        assert!((ta[2] - expected).abs() < 1e-9);
    }

    #[test]
    fn ridgeless_examples() {
        let basis = EncodedDataset::boolean(Encoding::Basis, 3).unwrap();
        let k = quantum_kernel(&states(&basis)).unwrap();
        let y = [1.0, -1.0, 1.0, 1.0];
        let train = [0, 1, 2, 3];
        let pred = ridgeless_regression(&k.select(&train, &train), &y, &k.select(&train, &train)).unwrap();
        assert!(pred.iter().zip(&y).all(|(p, t)| (p - t).abs() < 1e-12));
        let pred = ridgeless_regression(&k.select(&train, &train), &y, &k.select(&[4, 5], &train)).unwrap();
        assert!(pred.iter().all(|p| *p == 0.0));
        // homogeneity
        let amp = EncodedDataset::boolean(Encoding::Amplitude01, 3).unwrap();
        let k = quantum_kernel(&states(&amp)).unwrap();
        let tr = [0, 2, 4];
        let te = [1, 3, 5, 6];
        let a = ridgeless_regression(&k.select(&tr, &tr), &[1.0, -1.0, 1.0], &k.select(&te, &tr)).unwrap();
        let b =
            ridgeless_regression(&(k.select(&tr, &tr) * 3.5), &[1.0, -1.0, 1.0], &(k.select(&te, &tr) * 3.5)).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn learning_curve_basics() {
        let basis = EncodedDataset::boolean(Encoding::Basis, 5).unwrap();
        let k = quantum_kernel(&states(&basis)).unwrap();
        let f = parity(5);
        let target: Vec<f64> = (0..32).map(|i| f.sign(i)).collect();
        let pts = learning_curve(&k, &target, &[4, 16, 32], 20, 0).unwrap();
        assert!((pts[0].mean_mse - 1.0).abs() < 1e-12 && (pts[1].mean_mse - 1.0).abs() < 1e-12);
        assert!(pts[2].mean_mse < 1e-9);
        assert!(curve_to_csv(&pts).starts_with("m,mean_mse,stderr\n"));
        assert!(learning_curve(&k, &target, &[33], 1, 0).is_err());
    }

    #[test]
    fn kernel_matrix_validation() {
        assert!(KernelMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(KernelMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(KernelMatrix::new(DMatrix::identity(3, 3)).is_ok());
    }
}
