//! Plugin entropy, exactly from a sample and approximately from filter counters.
//!
//! With `m` hashes and `c` elements, the filter estimate treats every nonzero
//! cell as a "value" with frequency `counter / c`. Without collisions each
//! distinct element shows up in exactly `m` cells holding its multiplicity, so
//! the raw sum is `m` times the sample entropy; dividing by `m` recovers it.
//! Collisions merge probability mass and can only lower the result, which is
//! why the maximum over independently seeded filters is the better estimate.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::filter::{counter_sum, CountingBloomFilter};
use crate::{Error, Result};

/// Logarithm base for entropy values. Defaults to bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);
    pub const NATS: LogBase = LogBase(std::f64::consts::E);
    pub const DITS: LogBase = LogBase(10.0);

    pub fn new(base: f64) -> Result<Self> {
        if base.is_finite() && base > 1.0 {
            Ok(Self(base))
        } else {
            Err(Error::InvalidLogBase(base))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn log(self, x: f64) -> f64 {
        if self == Self::BITS {
            x.log2()
        } else if self == Self::NATS {
            x.ln()
        } else if self == Self::DITS {
            x.log10()
        } else {
            x.ln() / self.0.ln()
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        Self::BITS
    }
}

impl FromStr for LogBase {
    type Err = Error;

    /// Accepts `e` or any number greater than 1.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "e" => Ok(Self::NATS),
            other => Self::new(other.parse().map_err(|_| Error::InvalidLogBase(f64::NAN))?),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::NATS {
            f.write_str("e")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Multiset of byte-string values, kept sorted so summation order is stable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleHistogram {
    counts: BTreeMap<Vec<u8>, u64>,
    total: u64,
}

impl SampleHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: &[u8]) {
        self.add_n(value, 1);
    }

    /// Adds `n` occurrences of `value`. `n == 0` is a no-op.
    pub fn add_n(&mut self, value: &[u8], n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(value.to_vec()).or_insert(0) += n;
        self.total += n;
    }

    /// Sample size.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct values.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }
}

impl<T: AsRef<[u8]>> FromIterator<T> for SampleHistogram {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut h = Self::new();
        for v in iter {
            h.add(v.as_ref());
        }
        h
    }
}

/// `-sum p log p` with `p = count / total` over the sample's values.
pub fn exact_plugin_entropy(hist: &SampleHistogram, base: LogBase) -> Result<f64> {
    if hist.is_empty() {
        return Err(Error::EmptySample);
    }
    let total = hist.total as f64;
    let mut h = 0.0;
    for &count in hist.counts.values() {
        let p = count as f64 / total;
        h -= p * base.log(p);
    }
    Ok(h)
}

fn check_filter_state(counters: &[u16], m: u32, c: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("num_hashes must be at least 1"));
    }
    if c == 0 {
        return Err(Error::EmptyFilter);
    }
    let sum = counter_sum(counters);
    if u128::from(sum) != u128::from(m) * u128::from(c) {
        return Err(Error::InconsistentState { sum, m, count: c });
    }
    Ok(())
}

/// `-sum p log p` over cells with `p = counter / c` (not `counter / (m c)`).
///
/// Cells holding a self-collision can have `p > 1`; their term is negative
/// and is kept as is.
pub fn bf_entropy_uncorrected(counters: &[u16], m: u32, c: u64, base: LogBase) -> Result<f64> {
    check_filter_state(counters, m, c)?;
    let c = c as f64;
    let mut h = 0.0;
    for &count in counters {
        if count != 0 {
            let p = f64::from(count) / c;
            h -= p * base.log(p);
        }
    }
    Ok(h)
}

/// The filter entropy estimate: [`bf_entropy_uncorrected`] divided by `m`.
pub fn bf_entropy(counters: &[u16], m: u32, c: u64, base: LogBase) -> Result<f64> {
    Ok(bf_entropy_uncorrected(counters, m, c, base)? / f64::from(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub uncorrected: f64,
    pub corrected: f64,
    /// Sample entropy, when the raw data is at hand.
    pub exact: Option<f64>,
    pub log_base: LogBase,
    pub m: u32,
    pub c: u64,
}

impl EntropyReport {
    pub fn with_exact(self, exact: f64) -> Self {
        Self { exact: Some(exact), ..self }
    }
}

pub fn filter_entropy(filter: &CountingBloomFilter, base: LogBase) -> Result<EntropyReport> {
    let m = filter.config().num_hashes();
    let c = filter.inserted_count();
    let uncorrected = bf_entropy_uncorrected(filter.counters(), m, c, base)?;
    Ok(EntropyReport {
        uncorrected,
        corrected: uncorrected / f64::from(m),
        exact: None,
        log_base: base,
        m,
        c,
    })
}

/// Maximum [`bf_entropy`] over filters summarizing the same multiset.
///
/// Every collision lowers a filter's estimate, so the largest one is closest
/// to the sample entropy. That the filters saw the same data cannot be
/// checked here.
pub fn ensemble_entropy(filters: &[CountingBloomFilter], base: LogBase) -> Result<f64> {
    let mut best: Option<f64> = None;
    for f in filters {
        let h = bf_entropy(f.counters(), f.config().num_hashes(), f.inserted_count(), base)?;
        best = Some(best.map_or(h, |b| b.max(h)));
    }
    best.ok_or(Error::EmptyEnsemble)
}

/// Nonzero cells sharing one counter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValueGroup {
    pub value: u16,
    pub cells: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionDiagnosis {
    pub certain: bool,
    /// Groups whose cell count is not a multiple of `m`, by ascending value.
    pub violating_groups: Vec<ValueGroup>,
}

/// Proves a collision from the counters alone, when possible.
///
/// Without collisions an element of multiplicity `k` owns exactly `m` cells
/// holding `k`, so the number of cells holding any given value is a multiple
/// of `m`. A group breaking that rule cannot come from a collision-free
/// trace. The converse does not hold: collisions can keep every group
/// divisible, so `certain == false` proves nothing.
pub fn certain_collision(counters: &[u16], m: u32) -> Result<CollisionDiagnosis> {
    if m == 0 {
        return Err(Error::InvalidConfig("num_hashes must be at least 1"));
    }
    let mut groups: BTreeMap<u16, u64> = BTreeMap::new();
    for &v in counters.iter().filter(|&&v| v != 0) {
        *groups.entry(v).or_insert(0) += 1;
    }
    let violating_groups: Vec<ValueGroup> = groups
        .into_iter()
        .filter(|&(_, cells)| cells % u64::from(m) != 0)
        .map(|(value, cells)| ValueGroup { value, cells })
        .collect();
    Ok(CollisionDiagnosis { certain: !violating_groups.is_empty(), violating_groups })
}
