//! Test-only oracles, kept apart from the library code paths they check.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use cbf_entropy::{CountingBloomFilter, FilterConfig};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Zipf};

/// Plain FNV-1a 64, written out longhand.
pub fn reference_fnv1a64(data: &[u8]) -> u64 {
    let mut h: u128 = 14_695_981_039_346_656_037;
    for &b in data {
        h ^= u128::from(b);
        h = (h * 1_099_511_628_211) % (1u128 << 64);
    }
    h as u64
}

/// Cell indexes by direct evaluation of the double-hashing definition.
pub fn reference_indexes(seed: u64, size: u64, m: u32, element: &[u8]) -> Vec<u64> {
    let keyed = |tag: u8| {
        let mut buf = seed.to_le_bytes().to_vec();
        buf.push(tag);
        buf.extend_from_slice(element);
        reference_fnv1a64(&buf)
    };
    let h1 = u128::from(keyed(1));
    let mut stride = keyed(2) % size;
    if stride == 0 && size > 1 {
        stride = 1;
    }
    (0..u128::from(m)).map(|i| ((h1 + i * u128::from(stride)) % u128::from(size)) as u64).collect()
}

/// Sample entropy from raw values, in bits.
pub fn exact_bits<T: AsRef<[u8]>>(sample: &[T]) -> f64 {
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    for v in sample {
        *counts.entry(v.as_ref()).or_default() += 1;
    }
    let n = sample.len() as f64;
    counts
        .values()
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Replays every hash outcome of the raw trace. True if two outcomes, from
/// the same or different elements, landed in one cell.
pub fn trace_shares_cell<T: AsRef<[u8]>>(config: &FilterConfig, sample: &[T]) -> bool {
    let distinct: HashSet<&[u8]> = sample.iter().map(|v| v.as_ref()).collect();
    let mut seen = HashSet::new();
    for e in distinct {
        for cell in reference_indexes(config.seed(), config.size() as u64, config.num_hashes(), e) {
            if !seen.insert(cell) {
                return true;
            }
        }
    }
    false
}

pub fn build<T: AsRef<[u8]>>(config: FilterConfig, sample: &[T]) -> CountingBloomFilter {
    let mut f = CountingBloomFilter::new(config).unwrap();
    for v in sample {
        f.insert(v.as_ref()).unwrap();
    }
    f
}

/// A shuffled multiset with at most `max_distinct` values, each repeated
/// at most `max_count` times. Values are random 8-byte strings; sequential
/// names would differ only in their last byte and share cells structurally.
pub fn random_multiset<R: Rng>(rng: &mut R, max_distinct: usize, max_count: u32) -> Vec<Vec<u8>> {
    let distinct = rng.random_range(1..=max_distinct);
    let mut values: Vec<[u8; 8]> = Vec::with_capacity(distinct);
    while values.len() < distinct {
        let v: [u8; 8] = rng.random();
        if !values.contains(&v) {
            values.push(v);
        }
    }
    let mut sample = Vec::new();
    for v in values {
        for _ in 0..rng.random_range(1..=max_count) {
            sample.push(v.to_vec());
        }
    }
    sample.shuffle(rng);
    sample
}

/// `n` draws from a Zipf(1.1) law over `support` words.
pub fn zipf_sample<R: Rng>(rng: &mut R, n: usize, support: u64) -> Vec<Vec<u8>> {
    let zipf = Zipf::new(support as f64, 1.1).unwrap();
    (0..n).map(|_| format!("word{}", zipf.sample(rng) as u64).into_bytes()).collect()
}
