//! IDX image files and the two-class, eight-component FashionMNIST reduction.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;

use crate::boolean::Split;
use crate::encode::{EncodedDataset, Encoding};
use crate::error::{Error, Result};
use crate::num::fixed;
use crate::rng::stream;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Contents of one IDX file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Idx {
    /// Row-major pixel grids.
    Images {
        rows: usize,
        cols: usize,
        pixels: Vec<Vec<u8>>,
    },
    Labels(Vec<u8>),
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Parse("truncated IDX header".into()))
}

/// Parse an uncompressed IDX image (`0x803`) or label (`0x801`) file.
pub fn load_idx(bytes: &[u8]) -> Result<Idx> {
    match read_u32(bytes, 0)? {
        IMAGE_MAGIC => {
            let count = read_u32(bytes, 4)? as usize;
            let rows = read_u32(bytes, 8)? as usize;
            let cols = read_u32(bytes, 12)? as usize;
            let size = rows * cols;
            let body = &bytes[16..];
            if body.len() != count * size {
                return Err(Error::Parse(format!("expected {} pixel bytes, found {}", count * size, body.len())));
            }
            let pixels =
                if size == 0 { vec![Vec::new(); count] } else { body.chunks(size).map(<[u8]>::to_vec).collect() };
            Ok(Idx::Images { rows, cols, pixels })
        }
        LABEL_MAGIC => {
            let count = read_u32(bytes, 4)? as usize;
            let body = &bytes[8..];
            if body.len() != count {
                return Err(Error::Parse(format!("expected {count} labels, found {}", body.len())));
            }
            Ok(Idx::Labels(body.to_vec()))
        }
        magic => Err(Error::Parse(format!("bad IDX magic {magic:#010x}"))),
    }
}

/// Serialise back to the IDX byte layout.
pub fn write_idx(idx: &Idx) -> Vec<u8> {
    let mut out = Vec::new();
    match idx {
        Idx::Images { rows, cols, pixels } => {
            for v in [IMAGE_MAGIC, pixels.len() as u32, *rows as u32, *cols as u32] {
                out.extend_from_slice(&v.to_be_bytes());
            }
            for p in pixels {
                out.extend_from_slice(p);
            }
        }
        Idx::Labels(labels) => {
            out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
            out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
            out.extend_from_slice(labels);
        }
    }
    out
}

/// Read an IDX file from disk, gunzipping it when it starts with the gzip magic.
pub fn read_idx_file(path: &Path) -> Result<Idx> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut bytes = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut bytes)?;
        load_idx(&bytes)
    } else {
        load_idx(&raw)
    }
}

/// Labelled grayscale images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageDataset {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

impl ImageDataset {
    pub fn new(rows: usize, cols: usize, images: Vec<Vec<u8>>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: images.len(), found: labels.len() });
        }
        if let Some(bad) = images.iter().find(|im| im.len() != rows * cols) {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: bad.len() });
        }
        Ok(Self { rows, cols, images, labels })
    }

    pub fn load(images: &Path, labels: &Path) -> Result<Self> {
        let Idx::Images { rows, cols, pixels } = read_idx_file(images)? else {
            return Err(Error::Parse(format!("{} is not an image file", images.display())));
        };
        let Idx::Labels(labels_v) = read_idx_file(labels)? else {
            return Err(Error::Parse(format!("{} is not a label file", labels.display())));
        };
        Self::new(rows, cols, pixels, labels_v)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Mean-centred principal components.
#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit component vectors, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    /// Sample covariance eigenvalues for the kept components.
    pub variances: Vec<f64>,
    /// Total variance of the data (trace of the covariance).
    pub total_variance: f64,
    /// Coordinates of each sample along the components.
    pub projections: Vec<Vec<f64>>,
}

impl Pca {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.iter().zip(x).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum()).collect()
    }
}

/// Top-`k` principal components of `vectors`.
///
/// Each component's sign is chosen so its largest-magnitude entry is positive.
pub fn pca_top_k(vectors: &[Vec<f64>], k: usize) -> Result<Pca> {
    let samples = vectors.len();
    let dim = vectors.first().ok_or(Error::EmptyDataset)?.len();
    if samples < k.max(2) {
        return Err(Error::RankDeficient { requested: k, rank: samples.saturating_sub(1) });
    }
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= samples as f64);
    let centred = DMatrix::from_fn(samples, dim, |i, j| vectors[i][j] - mean[j]);
    let cov = (centred.transpose() * &centred) / (samples - 1) as f64;
    let total_variance = cov.trace();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order.iter().filter(|&&i| eig.eigenvalues[i] > 1e-10 * top).count();
    if k > rank {
        return Err(Error::RankDeficient { requested: k, rank });
    }
    let mut components = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for &i in &order[..k] {
        let mut c: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let lead = c.iter().copied().fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if lead < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(c);
        variances.push(eig.eigenvalues[i]);
    }
    let mut pca = Pca { mean, components, variances, total_variance, projections: Vec::new() };
    pca.projections = vectors.iter().map(|v| pca.project(v)).collect();
    Ok(pca)
}

/// Eight PCA coordinates per image, amplitude encoded on three qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QFashionDataset {
    /// Training points first, then test points.
    pub inputs: Vec<Vec<f64>>,
    /// `true` for the second class.
    pub labels: Vec<bool>,
    pub split: Split,
    pub encoded: EncodedDataset,
    pub pca: Pca,
    pub classes: (u8, u8),
}

pub const QFASHION_COMPONENTS: usize = 8;

/// Filter to two classes, reduce to 8 principal components, and sample
/// disjoint train and test sets.
///
/// The PCA is fitted on the filtered images. Images whose projection is the
/// zero vector cannot be amplitude encoded and are never sampled.
pub fn build_qfashion(
    raw: &ImageDataset,
    classes: (u8, u8),
    sizes: (usize, usize),
    seed: u64,
) -> Result<QFashionDataset> {
    let keep: Vec<usize> =
        (0..raw.len()).filter(|&i| raw.labels[i] == classes.0 || raw.labels[i] == classes.1).collect();
    for class in [classes.0, classes.1] {
        let found = keep.iter().filter(|&&i| raw.labels[i] == class).count();
        if found == 0 {
            return Err(Error::InsufficientClass { class, found, needed: 1 });
        }
    }
    let vectors: Vec<Vec<f64>> = keep.iter().map(|&i| raw.images[i].iter().map(|&p| f64::from(p)).collect()).collect();
    let pca = pca_top_k(&vectors, QFASHION_COMPONENTS)?;
    let mut usable: Vec<usize> =
        (0..keep.len()).filter(|&j| pca.projections[j].iter().map(|v| v * v).sum::<f64>() > 1e-18).collect();
    let needed = sizes.0 + sizes.1;
    if usable.len() < needed {
        return Err(Error::TooManyTrainingPoints { requested: needed, available: usable.len() });
    }
    usable.shuffle(&mut stream(seed, "qfashion", 0));
    usable.truncate(needed);
    let inputs: Vec<Vec<f64>> = usable.iter().map(|&j| pca.projections[j].clone()).collect();
    let labels: Vec<bool> = usable.iter().map(|&j| raw.labels[keep[j]] == classes.1).collect();
    let encoded = EncodedDataset::from_inputs(Encoding::Amplitude01, &inputs)?;
    let split = Split { train: (0..sizes.0).collect(), test: (sizes.0..needed).collect() };
    Ok(QFashionDataset { inputs, labels, split, encoded, pca, classes })
}

impl QFashionDataset {
    /// Encoded-dataset CSV with a trailing `label` field on every point row.
    /// Rows below the training size are training points.
    pub fn to_csv(&self) -> String {
        let base = self.encoded.to_csv();
        let mut lines = base.lines();
        let mut out = String::new();
        for _ in 0..2 {
            if let Some(l) = lines.next() {
                out.push_str(l);
                out.push('\n');
            }
        }
        out.push_str(&format!("train,{}\n", self.split.train.len()));
        for line in lines {
            let index: usize = line.split(',').next().and_then(|f| f.parse().ok()).unwrap_or(0);
            out.push_str(&format!("{line},{}\n", u8::from(self.labels[index])));
        }
        out
    }

    /// Raw PCA coordinates as `index,split,label,x0..x7`.
    pub fn projections_csv(&self) -> String {
        let mut out = String::from("index,split,label");
        for k in 0..QFASHION_COMPONENTS {
            out.push_str(&format!(",x{k}"));
        }
        out.push('\n');
        for (i, x) in self.inputs.iter().enumerate() {
            let part = if i < self.split.train.len() { "train" } else { "test" };
            out.push_str(&format!("{i},{part},{}", u8::from(self.labels[i])));
            for v in x {
                out.push(',');
                out.push_str(&fixed(*v));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_fixtures() {
        let image = [0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0x7f];
        assert_eq!(load_idx(&image).unwrap(), Idx::Images { rows: 1, cols: 1, pixels: vec![vec![127]] });
        let labels = [0, 0, 8, 1, 0, 0, 0, 2, 0, 9];
        assert_eq!(load_idx(&labels).unwrap(), Idx::Labels(vec![0, 9]));
        assert_eq!(write_idx(&load_idx(&image).unwrap()), image);
        assert_eq!(write_idx(&load_idx(&labels).unwrap()), labels);
        assert!(matches!(load_idx(&[0, 0, 8, 4, 0, 0, 0, 0]), Err(Error::Parse(_))));
        assert!(matches!(load_idx(&image[..16]), Err(Error::Parse(_))));
        assert!(load_idx(&[0, 0]).is_err());
    }

    #[test]
    fn pca_line_and_variance() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 2.0 * i as f64 + 1.0]).collect();
        let pca = pca_top_k(&pts, 1).unwrap();
        let c = &pca.components[0];
        let s = 5f64.sqrt();
        assert!((c[0] - 1.0 / s).abs() < 1e-12 && (c[1] - 2.0 / s).abs() < 1e-12);
        // residual variance beyond the first component
        assert!((pca.total_variance - pca.variances[0]).abs() < 1e-9);
        assert!(matches!(pca_top_k(&pts, 2), Err(Error::RankDeficient { requested: 2, rank: 1 })));
    }

    #[test]
    fn pca_components_orthonormal_and_projecting_them() {
        let mut rng = stream(3, "pca-test", 0);
        use rand::Rng;
        let pts: Vec<Vec<f64>> = (0..60).map(|_| (0..6).map(|_| rng.random::<f64>()).collect()).collect();
        let pca = pca_top_k(&pts, 4).unwrap();
        for (a, ca) in pca.components.iter().enumerate() {
            for (b, cb) in pca.components.iter().enumerate() {
                let dot: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
            let lead = ca.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(lead > 0.0);
            // the mean shifted by a component lands on a unit coordinate
            let point: Vec<f64> = pca.mean.iter().zip(ca).map(|(m, c)| m + 3.0 * c).collect();
            let p = pca.project(&point);
            for (b, v) in p.iter().enumerate() {
                assert!((v - if a == b { 3.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        // captured variance is the variance of the projections
        for (k, var) in pca.variances.iter().enumerate() {
            let s: f64 = pca.projections.iter().map(|p| p[k] * p[k]).sum::<f64>() / 59.0;
            assert!((s - var).abs() < 1e-9);
        }
    }

    fn synthetic(count: usize) -> ImageDataset {
        let mut rng = stream(0, "synthetic-images", 0);
        use rand::Rng;
        let (mut images, mut labels) = (Vec::new(), Vec::new());
        for i in 0..count {
            let class = [0u8, 3, 5][i % 3];
            images.push(
                (0..16).map(|p| if (p + class as usize) % 4 == 0 { 200 } else { rng.random_range(0..60) }).collect(),
            );
            labels.push(class);
        }
        ImageDataset::new(4, 4, images, labels).unwrap()
    }

    #[test]
    fn qfashion_shapes_and_determinism() {
        let raw = synthetic(150);
        let a = build_qfashion(&raw, (0, 3), (60, 20), 1).unwrap();
        assert_eq!(a.split.train.len(), 60);
        assert_eq!(a.split.test.len(), 20);
        assert_eq!(a.encoded.len(), 80);
        assert!(a.encoded.states().unwrap().iter().all(|s| s.dim() == 8));
        assert_eq!(a, build_qfashion(&raw, (0, 3), (60, 20), 1).unwrap());
        assert_ne!(a.inputs, build_qfashion(&raw, (0, 3), (60, 20), 2).unwrap().inputs);
        assert!(matches!(build_qfashion(&raw, (0, 7), (10, 5), 1), Err(Error::InsufficientClass { class: 7, .. })));
        assert!(build_qfashion(&raw, (0, 3), (90, 20), 1).is_err());
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 3 + 80);
        assert!(csv.lines().nth(3).unwrap().ends_with(",0") || csv.lines().nth(3).unwrap().ends_with(",1"));
        assert_eq!(a.projections_csv().lines().count(), 81);
    }
}
