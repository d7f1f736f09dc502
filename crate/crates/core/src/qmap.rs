//! Single-readout quantum classifiers and their tensor-product perceptron form.
//!
//! A classifier is a unitary `U` of size `2N` acting on `|0>|x>` with the readout
//! qubit most significant. Its output `<x|<0|U† Z U|0>|x>` equals `x† A x` with
//! `A = 2 a†a - I` and `a` the top-left `N x N` block of `U`, which in turn
//! equals `w · (x ⊛ x)` for a real weight vector `w` of length `N²`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::num::{fixed, parse_f64, Complex64};

/// Tolerance on `|U†U - I|` accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-9;
/// Slack allowed on singular values before embedding fails.
pub const SPECTRAL_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Real feature vector `x ⊛ x` of length `N²`.
///
/// Entry `(i, i)` is `|x_i|²`; for `i != j` entry `(i, j)` (row-major, index
/// `N i + j`) is `Re(x_i x_j*) + Im(x_i x_j*)`. For real `x` this is the
/// Kronecker product `x ⊗ x`.
pub fn complex_tensor_square(x: &[Complex64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = x[i] * x[j].conj();
            out[n * i + j] = if i == j { p.re } else { p.re + p.im };
        }
    }
    out
}

/// Weight vector of a tensor-product perceptron on `N`-dimensional states.
#[derive(Clone, Debug, PartialEq)]
pub struct TppWeights {
    dim: usize,
    w: Vec<f64>,
}

impl TppWeights {
    pub fn new(dim: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: w.len() });
        }
        Ok(Self { dim, w })
    }

    /// `w` with ones at the `(i, i)` positions, i.e. `A = I`.
    pub fn diagonal_indicator(dim: usize) -> Self {
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[dim * i + i] = 1.0;
        }
        Self { dim, w }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, w: self.w.iter().map(|v| v * factor).collect() }
    }
}

/// `w · h`.
pub fn tpp_eval(w: &TppWeights, h: &[f64]) -> Result<f64> {
    if h.len() != w.w.len() {
        return Err(Error::DimensionMismatch { expected: w.w.len(), found: h.len() });
    }
    Ok(w.w.iter().zip(h).map(|(a, b)| a * b).sum())
}

/// Hermitian matrix `A` with `f(x) = x† A x`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable {
    a: CMatrix,
}

impl HermitianObservable {
    pub fn new(a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput("observable must be square".into()));
        }
        let defect = (&a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!("observable is not Hermitian (defect {defect:e})")));
        }
        Ok(Self { a })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `x† A x` (real part; the imaginary part vanishes up to rounding).
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (v.adjoint() * &self.a * &v)[(0, 0)].re
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.a.clone().symmetric_eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Unitary of size `2N` with the readout qubit as the most significant qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct QnnUnitary {
    u: CMatrix,
}

/// `max |U†U - I|` entrywise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl QnnUnitary {
    pub fn new(u: CMatrix) -> Result<Self> {
        if !u.is_square() || u.nrows() % 2 != 0 || u.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "expected an even square matrix, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let defect = unitarity_defect(&u);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { u })
    }

    pub fn identity(data_dim: usize) -> Self {
        Self { u: CMatrix::identity(2 * data_dim, 2 * data_dim) }
    }

    /// `[[0, I], [I, 0]]`: the readout is always flipped.
    pub fn block_swap(data_dim: usize) -> Self {
        let n = data_dim;
        let mut u = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            u[(i, n + i)] = Complex64::new(1.0, 0.0);
            u[(n + i, i)] = Complex64::new(1.0, 0.0);
        }
        Self { u }
    }

    /// Haar-random classifier on `data_dim`-dimensional states.
    pub fn haar<R: rand::Rng + ?Sized>(data_dim: usize, rng: &mut R) -> Self {
        Self { u: haar_random_unitary(2 * data_dim, rng) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    /// `N`, the dimension of the data register.
    pub fn data_dim(&self) -> usize {
        self.u.nrows() / 2
    }

    /// Top-left `N x N` block `a`.
    pub fn block(&self) -> CMatrix {
        let n = self.data_dim();
        self.u.view((0, 0), (n, n)).into_owned()
    }
}

/// `<x|<0| U† Z U |0>|x>`.
pub fn qnn_eval(u: &QnnUnitary, x: &[Complex64]) -> Result<f64> {
    let n = u.data_dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let v = DVector::from_column_slice(x);
    let out = u.u.columns(0, n) * v;
    let kept: f64 = out.rows(0, n).iter().map(|z| z.norm_sqr()).sum();
    let flipped: f64 = out.rows(n, n).iter().map(|z| z.norm_sqr()).sum();
    Ok(kept - flipped)
}

/// `A = 2 a†a - I` for the top-left block `a`.
pub fn observable(u: &QnnUnitary) -> HermitianObservable {
    let a = u.block();
    let n = a.nrows();
    let mut m = (a.adjoint() * &a) * Complex64::new(2.0, 0.0);
    for i in 0..n {
        m[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    // symmetrise away rounding
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianObservable { a: m }
}

/// Weights with `w · (x ⊛ x) = x† A x`.
pub fn observable_to_tpp(a: &HermitianObservable) -> TppWeights {
    let n = a.dim();
    let m = &a.a;
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        w[n * i + i] = m[(i, i)].re;
        for j in i + 1..n {
            let z = m[(i, j)];
            w[n * i + j] = z.re + z.im;
            w[n * j + i] = z.re - z.im;
        }
    }
    TppWeights { dim: n, w }
}

/// Inverse of [`observable_to_tpp`].
pub fn tpp_to_observable(w: &TppWeights) -> HermitianObservable {
    let n = w.dim;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(w.w[n * i + i], 0.0);
        for j in i + 1..n {
            let (upper, lower) = (w.w[n * i + j], w.w[n * j + i]);
            let z = Complex64::new((upper + lower) / 2.0, (upper - lower) / 2.0);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianObservable { a: m }
}

/// Perceptron weights reproducing the classifier's output exactly.
pub fn unitary_to_tpp(u: &QnnUnitary) -> Result<TppWeights> {
    let defect = unitarity_defect(&u.u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(observable_to_tpp(&observable(u)))
}

/// Hermitian positive square root of a Hermitian PSD matrix (negative
/// eigenvalues from rounding are clamped to zero).
fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Classifier realising `w` up to a positive factor.
///
/// The observable `A(w)` is divided by `scale = |A(w)|₂` (its largest absolute
/// eigenvalue, or 1 when `A(w) = 0`), so that `(A/scale + I)/2` is PSD with
/// spectrum in `[0, 1]`; its square root is embedded as the top-left block.
/// The result satisfies `qnn_eval(U, x) = tpp_eval(w, x ⊛ x) / scale`.
pub fn tpp_to_unitary(w: &TppWeights) -> (QnnUnitary, f64) {
    let a = tpp_to_observable(w);
    let norm = a.spectral_norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let a = HermitianObservable { a: a.a * Complex64::new(1.0 / scale, 0.0) };
    let u = observable_to_unitary(&a).expect("spectrum lies in [-1, 1] after rescaling");
    (u, scale)
}

/// Unitary whose single readout realises `A` exactly: `qnn_eval(U, x) = x† A x`.
///
/// Needs `|A|₂ <= 1`; the top-left block is `sqrt((A + I)/2)`.
pub fn observable_to_unitary(a: &HermitianObservable) -> Result<QnnUnitary> {
    let norm = a.spectral_norm();
    if norm > 1.0 + SPECTRAL_TOL {
        return Err(Error::SpectralBoundViolated(norm));
    }
    let n = a.dim();
    let mut half = &a.a * Complex64::new(0.5, 0.0);
    for i in 0..n {
        half[(i, i)] += Complex64::new(0.5, 0.0);
    }
    embed_in_unitary(&psd_sqrt(&half))
}

/// `[[M, R S V], [R S V, -M]]` with `M = R D V` a singular value decomposition
/// and `S = sqrt(I - D²)`.
pub fn embed_in_unitary(m: &CMatrix) -> Result<QnnUnitary> {
    if !m.is_square() {
        return Err(Error::InvalidInput("embedding needs a square matrix".into()));
    }
    let k = m.nrows();
    let svd = linalg::svd(m);
    if let Some(&s) = svd.singular_values.iter().find(|&&s| s > 1.0 + SPECTRAL_TOL) {
        return Err(Error::SpectralBoundViolated(s));
    }
    let comp = DVector::from_iterator(
        k,
        svd.singular_values.iter().map(|&s| Complex64::new((1.0 - s.min(1.0) * s.min(1.0)).sqrt(), 0.0)),
    );
    let off = &svd.u * CMatrix::from_diagonal(&comp) * &svd.v_t;
    let mut u = CMatrix::from_element(2 * k, 2 * k, czero());
    u.view_mut((0, 0), (k, k)).copy_from(m);
    u.view_mut((0, k), (k, k)).copy_from(&off);
    u.view_mut((k, 0), (k, k)).copy_from(&off);
    u.view_mut((k, k), (k, k)).copy_from(&(-m));
    QnnUnitary::new(u)
}

fn complex_gaussian<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// First `cols` columns of a Haar-random unitary of size `rows`.
///
/// QR of a complex Gaussian matrix, with each column multiplied by the phase
/// of the matching diagonal entry of `R` so the result is Haar distributed.
pub fn haar_isometry<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(cols <= rows && cols > 0);
    let qr = complex_gaussian(rows, cols, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random `dim x dim` unitary.
pub fn haar_random_unitary<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    haar_isometry(dim, dim, rng)
}

/// Uniformly random unit vector in `C^dim`.
pub fn random_unit_vector<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
        // astronomically unlikely, but keep drawing
        let _ = rng.random::<u8>();
    }
}

/// Row-major complex matrix text: a `rows,cols` line followed by one line per
/// row of `re,im` pairs.
pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = format!("{},{}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).flat_map(|j| [fixed(m[(i, j)].re), fixed(m[(i, j)].im)]).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let shape: Vec<usize> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .split(',')
        .map(|f| f.trim().parse().map_err(|_| Error::Parse("bad matrix shape".into())))
        .collect::<Result<_>>()?;
    let [rows, cols] = shape[..] else {
        return Err(Error::Parse("matrix shape needs two fields".into()));
    };
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
        let vals = line.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
        if vals.len() != 2 * cols {
            return Err(Error::Parse(format!("row {i} has {} values, expected {}", vals.len(), 2 * cols)));
        }
        for j in 0..cols {
            m[(i, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    Ok(m)
}
