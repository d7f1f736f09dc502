//! The distribution over Boolean functions induced by Haar-random QNNs on an
//! encoded dataset.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::boolean::{lz_complexity_bits, BooleanFunction};
use crate::encode::EncodedDataset;
use crate::error::{Error, Result};
use crate::num::Complex64;
use crate::qmap::{haar_isometry, unitarity_defect, UNITARY_TOL};
use crate::rng::stream;

/// Draws per random stream. Fixed so results do not depend on the thread count.
const BLOCK: u64 = 4096;
/// One in this many draws has its unitarity re-checked.
const CHECK_EVERY: u64 = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct PriorHistogram {
    pub n: usize,
    pub encoding: String,
    pub samples: u64,
    pub seed: u64,
    /// Function bit string (inputs in ascending order) to count.
    pub counts: BTreeMap<String, u64>,
}

impl PriorHistogram {
    pub fn probability(&self, bits: &str) -> f64 {
        self.counts.get(bits).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    /// `bitstring,count` rows after a `# key=value` metadata header.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# n={}\n# encoding={}\n# samples={}\n# seed={}\nbitstring,count\n",
            self.n, self.encoding, self.samples, self.seed
        );
        for (bits, count) in &self.counts {
            out.push_str(&format!("{bits},{count}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut counts = BTreeMap::new();
        let mut header = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(kv) = line.strip_prefix('#') {
                let (k, v) = kv.trim().split_once('=').ok_or_else(|| Error::Parse(format!("bad metadata {line:?}")))?;
                meta.insert(k.trim().to_string(), v.trim().to_string());
            } else if !header {
                if line != "bitstring,count" {
                    return Err(Error::Parse(format!("unexpected header {line:?}")));
                }
                header = true;
            } else {
                let (bits, count) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
                if !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::Parse(format!("bad bit string {bits:?}")));
                }
                let count = count.parse().map_err(|_| Error::Parse(format!("bad count {count:?}")))?;
                counts.insert(bits.to_string(), count);
            }
        }
        let get = |k: &str| meta.get(k).cloned().ok_or_else(|| Error::Parse(format!("missing metadata {k}")));
        let int = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| Error::Parse(format!("bad metadata {k}"))) };
        let hist = Self {
            n: int("n")? as usize,
            encoding: get("encoding")?,
            samples: int("samples")?,
            seed: int("seed")?,
            counts,
        };
        let total: u64 = hist.counts.values().sum();
        if total != hist.samples {
            return Err(Error::Parse(format!("counts sum to {total}, header says {}", hist.samples)));
        }
        Ok(hist)
    }

    /// Combine two histograms of the same experiment.
    pub fn merge(&mut self, other: &PriorHistogram) {
        for (bits, c) in &other.counts {
            *self.counts.entry(bits.clone()).or_insert(0) += c;
        }
        self.samples += other.samples;
    }
}

/// Labels every input of `dataset` by the sign of a Haar-random single-readout
/// QNN, `samples` times.
///
/// Only the first `N` columns of the `2N × 2N` unitary act on `|0>|x>`, so a
/// Haar isometry of that shape is sampled. Inputs the encoding cannot
/// represent are the zero vector, whose output 0 is class 0.
pub fn sample_prior(dataset: &EncodedDataset, samples: u64, seed: u64) -> Result<PriorHistogram> {
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let states = dataset.states().ok_or_else(|| Error::InvalidInput("prior sampling needs quantum states".into()))?;
    let dim = states.first().ok_or(Error::EmptyDataset)?.dim();
    let inputs = dataset.indices.len() + dataset.dropped.len();
    let columns: Vec<DVector<Complex64>> = states.iter().map(|s| DVector::from_column_slice(s.amps())).collect();
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<Result<BTreeMap<String, u64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, "prior", b);
            let mut counts = BTreeMap::new();
            let mut bits = vec![b'0'; inputs];
            for draw in b * BLOCK..((b + 1) * BLOCK).min(samples) {
                let v = haar_isometry(2 * dim, dim, &mut rng);
                if draw % CHECK_EVERY == 0 {
                    let defect = unitarity_defect(&v);
                    if !(defect <= UNITARY_TOL) {
                        return Err(Error::NotUnitary(defect));
                    }
                }
                let top = v.rows(0, dim);
                let bottom = v.rows(dim, dim);
                for (x, &i) in columns.iter().zip(&dataset.indices) {
                    let up = (top * x).norm_squared();
                    let down = (bottom * x).norm_squared();
                    bits[i] = if up - down > 0.0 { b'1' } else { b'0' };
                }
                let key = String::from_utf8(bits.clone()).expect("ascii");
                *counts.entry(key).or_insert(0) += 1;
            }
            Ok(counts)
        })
        .collect();
    let mut hist = PriorHistogram {
        n: dataset.n,
        encoding: dataset.encoding.tag().to_string(),
        samples: 0,
        seed,
        counts: BTreeMap::new(),
    };
    for part in partial {
        for (k, c) in part? {
            *hist.counts.entry(k).or_insert(0) += c;
        }
    }
    hist.samples = samples;
    Ok(hist)
}

/// `(rank, probability)` from most to least likely; ties in bit string order.
pub fn rank_plot(hist: &PriorHistogram) -> Result<Vec<(usize, f64)>> {
    if hist.counts.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut entries: Vec<(&String, &u64)> = hist.counts.iter().collect();
    entries.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    Ok(entries.iter().enumerate().map(|(r, (_, &c))| (r + 1, c as f64 / hist.samples as f64)).collect())
}

/// Probability mass per LZ complexity value, ascending by complexity.
pub fn prior_by_complexity(hist: &PriorHistogram) -> Vec<(f64, f64)> {
    let mut bins: BTreeMap<u64, f64> = BTreeMap::new();
    for (bits, &c) in &hist.counts {
        let s: Vec<bool> = bits.bytes().map(|b| b == b'1').collect();
        let lz = lz_complexity_bits(&s);
        *bins.entry(lz.to_bits()).or_insert(0.0) += c as f64 / hist.samples as f64;
    }
    let mut out: Vec<(f64, f64)> = bins.into_iter().map(|(k, p)| (f64::from_bits(k), p)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Count of draws whose function has the given complexity.
pub fn count_with_complexity(hist: &PriorHistogram, lz: f64) -> u64 {
    hist.counts
        .iter()
        .filter(|(bits, _)| {
            let s: Vec<bool> = bits.bytes().map(|b| b == b'1').collect();
            lz_complexity_bits(&s) == lz
        })
        .map(|(_, &c)| c)
        .sum()
}

/// The Boolean function behind a histogram key.
pub fn function_of(hist: &PriorHistogram, bits: &str) -> Result<BooleanFunction> {
    let f: BooleanFunction = bits.parse()?;
    if f.n() != hist.n {
        return Err(Error::BadLength { n: hist.n, found: bits.len() });
    }
    Ok(f)
}
