//! Boolean functions on `{0,1}^n`, the standard target suite, and the
//! complexity and class-balance measures used to sort it.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{stream, Rng};

/// Truth table of `f: {0,1}^n -> {0,1}`.
///
/// Bit `i` is the label of the input whose big-endian binary expansion is `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanFunction {
    n: usize,
    bits: Vec<bool>,
}

impl BooleanFunction {
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        if n >= usize::BITS as usize || bits.len() != 1usize << n {
            return Err(Error::BadLength { n, found: bits.len() });
        }
        Ok(Self { n, bits })
    }

    /// Function from a label callback over input indices.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Self {
        Self { n, bits: (0..1usize << n).map(f).collect() }
    }

    pub fn constant(n: usize, value: bool) -> Self {
        Self { n, bits: vec![value; 1 << n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of inputs, `2^n`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn label(&self, index: usize) -> bool {
        self.bits[index]
    }

    /// Label as `±1`.
    pub fn sign(&self, index: usize) -> f64 {
        if self.bits[index] {
            1.0
        } else {
            -1.0
        }
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self { n: self.n, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn is_constant(&self) -> bool {
        self.bits.iter().all(|&b| b == self.bits[0])
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BooleanFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let len = bits.len();
        if !len.is_power_of_two() {
            return Err(Error::Parse(format!("bit string length {len} is not a power of two")));
        }
        Self::new(len.trailing_zeros() as usize, bits)
    }
}

/// Big-endian binary expansion of `index` over `n` bits.
pub fn index_to_input(index: usize, n: usize) -> Result<Vec<u8>> {
    if n >= usize::BITS as usize || index >= 1usize << n {
        return Err(Error::IndexOutOfRange { index, n });
    }
    Ok((0..n).map(|k| ((index >> (n - 1 - k)) & 1) as u8).collect())
}

/// All `2^n` inputs in ascending index order.
pub fn all_inputs(n: usize) -> Vec<Vec<u8>> {
    (0..1usize << n).map(|i| index_to_input(i, n).expect("in range")).collect()
}

/// `f(x) = x_1 + ... + x_n mod 2`.
pub fn parity(n: usize) -> BooleanFunction {
    BooleanFunction::from_fn(n, |i| i.count_ones() % 2 == 1)
}

/// `min(p, 1 - p)` with `p` the fraction of zero labels.
pub fn class_balance(f: &BooleanFunction) -> f64 {
    let zeros = (f.len() - f.ones()) as f64 / f.len() as f64;
    zeros.min(1.0 - zeros)
}

/// LZ76 phrase count with exhaustive history (Kaspar-Schuster scan).
pub fn lz76_phrases(s: &[bool]) -> usize {
    let n = s.len();
    if n <= 1 {
        return n;
    }
    let (mut c, mut l, mut i, mut k, mut k_max) = (1usize, 1usize, 0usize, 1usize, 1usize);
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// Lempel-Ziv complexity of a truth table.
///
/// Constant strings of length `L` score `log2 L`; otherwise the phrase
/// counts of the string and its reverse are averaged and scaled by `log2 L`.
pub fn lz_complexity(f: &BooleanFunction) -> f64 {
    lz_complexity_bits(f.bits())
}

pub fn lz_complexity_bits(s: &[bool]) -> f64 {
    let scale = (s.len() as f64).log2();
    if s.iter().all(|&b| b == s[0]) {
        return scale;
    }
    let rev: Vec<bool> = s.iter().rev().copied().collect();
    scale * (lz76_phrases(s) + lz76_phrases(&rev)) as f64 / 2.0
}

/// Which recipe produced a suite member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Parity,
    /// Shuffled string with exactly this many ones.
    FixedCount(usize),
    /// A random block repeated this many times.
    Symmetric(usize),
    Random,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Parity => write!(f, "parity"),
            Generator::FixedCount(t) => write!(f, "fixed-count:{t}"),
            Generator::Symmetric(p) => write!(f, "symmetric:{p}"),
            Generator::Random => write!(f, "random"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown generator tag {s:?}"));
        match s.split_once(':') {
            None if s == "parity" => Ok(Generator::Parity),
            None if s == "random" => Ok(Generator::Random),
            Some(("fixed-count", t)) => t.parse().map(Generator::FixedCount).map_err(|_| bad()),
            Some(("symmetric", p)) => p.parse().map(Generator::Symmetric).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteEntry {
    pub generator: Generator,
    pub seed: u64,
    pub function: BooleanFunction,
}

/// The 100-function benchmark used for expressivity and generalisation sweeps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSuite {
    pub n: usize,
    pub entries: Vec<SuiteEntry>,
}

const FIXED_COUNT_MEMBERS: usize = 33;
const SYMMETRIC_MEMBERS: usize = 54;
const SYMMETRIC_DRAWS_PER_FOLD: usize = 10;
const RANDOM_MEMBERS: usize = 12;

/// Build the standard suite: parity, 33 fixed-count strings, 54 distinct
/// repeated-block strings and 12 uniform strings.
///
/// Fixed counts run over `t = k * 2^n / 32` for `k = 0..=32`, which is
/// `0, 4, ..., 128` at `n = 7`. Repeated-block strings take ten draws for each
/// fold `p = 2, 4, ..., 2^n`, dropping duplicates, then keep drawing with `p`
/// cycling from 2 until 54 distinct strings are held (or every such string has
/// been found, which only happens for `n <= 3`).
pub fn generate_target_suite(n: usize, seed: u64) -> TargetSuite {
    assert!((1..=16).contains(&n), "suite generation supports 1 <= n <= 16");
    let len = 1usize << n;
    let mut rng = stream(seed, "suite", n as u64);
    let mut entries = Vec::with_capacity(100);
    let mut push = |generator, bits: Vec<bool>| {
        entries.push(SuiteEntry { generator, seed, function: BooleanFunction { n, bits } })
    };

    push(Generator::Parity, parity(n).bits);

    for k in 0..FIXED_COUNT_MEMBERS {
        let t = (k * len + 16) / 32;
        let mut bits: Vec<bool> = (0..len).map(|i| i < t).collect();
        bits.shuffle(&mut rng);
        push(Generator::FixedCount(t), bits);
    }

    let folds: Vec<usize> = (1..=n).map(|k| 1usize << k).collect();
    // every p-fold string is also 2-fold, so this is the size of the pool
    let available = if len / 2 >= 64 { usize::MAX } else { 1usize << (len / 2) };
    let target = SYMMETRIC_MEMBERS.min(available);
    let mut seen = std::collections::HashSet::new();
    let mut symmetric = Vec::with_capacity(target);
    let mut draw = |p: usize, rng: &mut Rng, symmetric: &mut Vec<(usize, Vec<bool>)>| {
        let block: Vec<bool> = (0..len / p).map(|_| rng.random_bool(0.5)).collect();
        let bits: Vec<bool> = block.iter().copied().cycle().take(len).collect();
        if seen.insert(bits.clone()) {
            symmetric.push((p, bits));
        }
    };
    for &p in &folds {
        for _ in 0..SYMMETRIC_DRAWS_PER_FOLD {
            draw(p, &mut rng, &mut symmetric);
        }
    }
    let mut k = 0;
    while symmetric.len() < target {
        draw(folds[k % folds.len()], &mut rng, &mut symmetric);
        k += 1;
    }
    symmetric.truncate(target);
    for (p, bits) in symmetric {
        push(Generator::Symmetric(p), bits);
    }

    for _ in 0..RANDOM_MEMBERS {
        let bits = (0..len).map(|_| rng.random_bool(0.5)).collect();
        push(Generator::Random, bits);
    }
    TargetSuite { n, entries }
}

impl TargetSuite {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn functions(&self) -> impl Iterator<Item = &BooleanFunction> {
        self.entries.iter().map(|e| &e.function)
    }

    /// One `tag,seed,bitstring` record per line.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.generator, e.seed, e.function));
        }
        out
    }

    pub fn from_records(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", lineno + 1)));
            }
            let generator = fields[0].parse()?;
            let seed = fields[1].trim().parse().map_err(|_| Error::Parse(format!("line {}: bad seed", lineno + 1)))?;
            let function: BooleanFunction = fields[2].parse()?;
            entries.push(SuiteEntry { generator, seed, function });
        }
        let n = entries.first().map_or(0, |e| e.function.n());
        if entries.iter().any(|e| e.function.n() != n) {
            return Err(Error::Parse("suite mixes input sizes".into()));
        }
        Ok(Self { n, entries })
    }
}

/// Disjoint train/test index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Draw `m` training indices uniformly from `candidates`; the rest is the test set.
///
/// `candidates` are the encodable input indices (all `2^n` of them unless the
/// encoding drops the origin). Both halves come back sorted.
pub fn split_train_test(candidates: &[usize], m: usize, seed: u64) -> Result<Split> {
    if m == 0 || m > candidates.len() {
        return Err(Error::TooManyTrainingPoints { requested: m, available: candidates.len() });
    }
    let mut shuffled = candidates.to_vec();
    shuffled.shuffle(&mut stream(seed, "split", candidates.len() as u64));
    let mut train = shuffled[..m].to_vec();
    let mut test = shuffled[m..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    /// Direct parse: each phrase is the longest prefix already seen starting
    /// at an earlier position (overlap allowed) plus one fresh symbol.
    fn lz76_naive(s: &[bool]) -> usize {
        let n = s.len();
        let mut pos = 0;
        let mut phrases = 0;
        while pos < n {
            let mut best = 0;
            for start in 0..pos {
                let mut l = 0;
                while pos + l < n && s[start + l] == s[pos + l] {
                    l += 1;
                }
                best = best.max(l);
            }
            phrases += 1;
            pos += best + 1;
        }
        phrases
    }

    #[test]
    fn index_expansion() {
        assert_eq!(index_to_input(0, 3).unwrap(), vec![0, 0, 0]);
        assert_eq!(index_to_input(5, 3).unwrap(), vec![1, 0, 1]);
        assert_eq!(index_to_input(7, 3).unwrap(), vec![1, 1, 1]);
        assert!(matches!(index_to_input(8, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn parity_tables() {
        assert_eq!(parity(1).to_string(), "01");
        assert_eq!(parity(2).to_string(), "0110");
        assert_eq!(parity(3).to_string(), "01101001");
        for n in 1..=8 {
            assert_eq!(class_balance(&parity(n)), 0.5);
        }
    }

    #[test]
    fn balance_examples() {
        assert_eq!(class_balance(&"01101001".parse().unwrap()), 0.5);
        assert_eq!(class_balance(&BooleanFunction::constant(3, false)), 0.0);
        assert_eq!(class_balance(&"00010000".parse().unwrap()), 0.125);
    }

    #[test]
    fn balance_complement_exhaustive_n3() {
        for code in 0..256usize {
            let f = BooleanFunction::from_fn(3, |i| (code >> i) & 1 == 1);
            assert_eq!(class_balance(&f), class_balance(&f.complement()));
        }
    }

    #[test]
    fn lz_constant_and_hand_parse() {
        assert_eq!(lz_complexity(&"00000000".parse().unwrap()), 3.0);
        for n in 1..=10 {
            let f = BooleanFunction::constant(n, true);
            assert_eq!(lz_complexity(&f), n as f64);
        }
        // 0|1|010101 and 1|0|101010: three phrases each way
        assert_eq!(lz76_phrases(&bits("01010101")), 3);
        assert_eq!(lz76_phrases(&bits("10101010")), 3);
        assert_eq!(lz_complexity(&"01010101".parse().unwrap()), 9.0);
        // 0|001|10 and 0|1|100: 3 + 3
        assert_eq!(lz76_phrases(&bits("000110")), 3);
    }

    #[test]
    fn lz_scan_matches_naive_parse() {
        for len in 1..=10usize {
            for code in 0..(1usize << len) {
                let s: Vec<bool> = (0..len).map(|i| (code >> i) & 1 == 1).collect();
                assert_eq!(lz76_phrases(&s), lz76_naive(&s), "{s:?}");
            }
        }
        let mut rng = stream(3, "lz-test", 0);
        for _ in 0..200 {
            let s: Vec<bool> = (0..128).map(|_| rng.random_bool(0.5)).collect();
            assert_eq!(lz76_phrases(&s), lz76_naive(&s));
        }
    }

    #[test]
    fn lz_complement_invariant_exhaustive_len8() {
        for code in 0..256usize {
            let f = BooleanFunction::from_fn(3, |i| (code >> i) & 1 == 1);
            assert_eq!(lz_complexity(&f), lz_complexity(&f.complement()));
        }
    }

    #[test]
    fn suite_composition() {
        let suite = generate_target_suite(7, 1);
        assert_eq!(suite.len(), 100);
        let count = |pred: fn(&Generator) -> bool| suite.entries.iter().filter(|e| pred(&e.generator)).count();
        assert_eq!(count(|g| matches!(g, Generator::Parity)), 1);
        assert_eq!(count(|g| matches!(g, Generator::FixedCount(_))), 33);
        assert_eq!(count(|g| matches!(g, Generator::Symmetric(_))), 54);
        assert_eq!(count(|g| matches!(g, Generator::Random)), 12);

        let fixed: Vec<_> = suite
            .entries
            .iter()
            .filter_map(|e| match e.generator {
                Generator::FixedCount(t) => Some((t, e.function.ones())),
                _ => None,
            })
            .collect();
        assert_eq!(fixed.first(), Some(&(0, 0)));
        assert_eq!(fixed.last(), Some(&(128, 128)));
        assert!(fixed.iter().all(|&(t, ones)| t == ones));
        assert!(fixed.iter().map(|&(t, _)| t).eq((0..=128).step_by(4)));

        let sym: std::collections::HashSet<_> = suite
            .entries
            .iter()
            .filter(|e| matches!(e.generator, Generator::Symmetric(_)))
            .map(|e| e.function.clone())
            .collect();
        assert_eq!(sym.len(), 54);
        for e in &suite.entries {
            if let Generator::Symmetric(p) = e.generator {
                let block = 128 / p;
                assert!((0..128).all(|i| e.function.label(i) == e.function.label(i % block)));
            }
        }
    }

    #[test]
    fn suite_is_deterministic() {
        for n in 1..=7 {
            assert_eq!(generate_target_suite(n, 9).to_records(), generate_target_suite(n, 9).to_records());
        }
        assert_ne!(generate_target_suite(7, 1), generate_target_suite(7, 2));
    }

    #[test]
    fn small_suites_cap_symmetric_pool() {
        let suite = generate_target_suite(3, 0);
        let sym = suite.entries.iter().filter(|e| matches!(e.generator, Generator::Symmetric(_))).count();
        assert_eq!(sym, 16);
    }

    #[test]
    fn records_round_trip() {
        let suite = generate_target_suite(5, 4);
        let text = suite.to_records();
        assert!(text.lines().next().unwrap().starts_with("parity,4,0110"));
        assert_eq!(TargetSuite::from_records(&text).unwrap(), suite);
    }

    #[test]
    fn split_shapes() {
        let encodable: Vec<usize> = (1..128).collect();
        let s = split_train_test(&encodable, 64, 3).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (64, 63));
        assert_eq!(s, split_train_test(&encodable, 64, 3).unwrap());
        assert!(s.train.iter().all(|i| !s.test.contains(i)));
        let all: Vec<usize> = (0..128).collect();
        assert!(split_train_test(&all, 128, 0).unwrap().test.is_empty());
        assert!(split_train_test(&encodable, 128, 0).is_err());
    }
}
