//! The counting Bloom filter: a fixed array of 16-bit counters and the net
//! number of elements currently summarized.
//!
//! Each insert adds exactly `num_hashes` increments (repeated indexes of one
//! element are *not* deduplicated), so `sum(counters) == num_hashes * inserted_count`
//! holds after every successful operation. Failed operations leave the filter
//! untouched.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::hash;
use crate::{Error, Result};

/// Width of every counter cell, in bits.
pub const COUNTER_WIDTH: u8 = 16;

/// Size, hash count and seed. Together they fully determine hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterConfig {
    size: usize,
    num_hashes: u32,
    seed: u64,
}

impl FilterConfig {
    pub fn new(size: usize, num_hashes: u32, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidConfig("size must be at least 1"));
        }
        if num_hashes == 0 {
            return Err(Error::InvalidConfig("num_hashes must be at least 1"));
        }
        Ok(Self { size, num_hashes, seed })
    }

    /// Number of counter cells.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of hash applications per element.
    pub fn num_hashes(&self) -> u32 {
        self.num_hashes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same size and hash count, different seed. Used to build ensembles.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    /// True if no two hash applications across all of `distinct` share a cell,
    /// i.e. the filter built from these elements has no collisions at all.
    pub fn collision_free<'a, I>(&self, distinct: I) -> bool
    where
        I: IntoIterator<Item = &'a [u8]>,
    {
        let mut seen = HashSet::new();
        distinct.into_iter().all(|e| self.indexes(e).into_iter().all(|cell| seen.insert(cell)))
    }

    /// The cell indexes `element` maps to, one per hash application.
    pub fn indexes(&self, element: &[u8]) -> IndexSet {
        let mut out = Vec::with_capacity(self.num_hashes as usize);
        hash::fill_indexes(self.seed, self.size as u64, self.num_hashes, element, &mut out);
        IndexSet(out)
    }
}

/// Cell indexes for one element, in hash-application order. May contain repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if two hash applications landed in the same cell.
    pub fn has_repeats(&self) -> bool {
        self.cell_multiplicities().any(|(_, n)| n > 1)
    }

    /// `(cell, occurrences)` pairs in ascending cell order.
    pub fn cell_multiplicities(&self) -> impl Iterator<Item = (usize, u32)> {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        let mut runs: Vec<(usize, u32)> = Vec::with_capacity(sorted.len());
        for cell in sorted {
            match runs.last_mut() {
                Some((c, n)) if *c == cell => *n += 1,
                _ => runs.push((cell, 1)),
            }
        }
        runs.into_iter()
    }
}

impl IntoIterator for IndexSet {
    type Item = usize;
    type IntoIter = std::vec::IntoIter<usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// Summary of the counter array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FilterStats {
    pub counter_sum: u64,
    pub nonzero_cells: usize,
    pub inserted_count: u64,
    pub max_counter: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingBloomFilter {
    config: FilterConfig,
    counters: Vec<u16>,
    inserted_count: u64,
}

impl CountingBloomFilter {
    /// An all-zero filter.
    pub fn new(config: FilterConfig) -> Result<Self> {
        // Re-validate: a config can also arrive through deserialization.
        let config = FilterConfig::new(config.size, config.num_hashes, config.seed)?;
        Ok(Self { config, counters: vec![0; config.size], inserted_count: 0 })
    }

    /// Rebuilds a filter from raw state, checking the length and the sum invariant.
    pub fn from_parts(config: FilterConfig, counters: Vec<u16>, inserted_count: u64) -> Result<Self> {
        let config = FilterConfig::new(config.size, config.num_hashes, config.seed)?;
        if counters.len() != config.size {
            return Err(Error::InvalidConfig("counter array length differs from size"));
        }
        let sum = counter_sum(&counters);
        let expected = u128::from(config.num_hashes) * u128::from(inserted_count);
        if u128::from(sum) != expected {
            return Err(Error::InconsistentState { sum, m: config.num_hashes, count: inserted_count });
        }
        Ok(Self { config, counters, inserted_count })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn counters(&self) -> &[u16] {
        &self.counters
    }

    /// Net number of elements inserted (inserts minus removes).
    pub fn inserted_count(&self) -> u64 {
        self.inserted_count
    }

    pub fn indexes(&self, element: &[u8]) -> IndexSet {
        self.config.indexes(element)
    }

    /// Adds `element`. Fails with [`Error::CounterOverflow`] if any touched
    /// cell would exceed `u16::MAX`, in which case nothing changes.
    pub fn insert(&mut self, element: &[u8]) -> Result<()> {
        let set = self.indexes(element);
        for (cell, n) in set.cell_multiplicities() {
            if u32::from(self.counters[cell]) + n > u32::from(u16::MAX) {
                return Err(Error::CounterOverflow { cell });
            }
        }
        for cell in set {
            self.counters[cell] += 1;
        }
        self.inserted_count += 1;
        Ok(())
    }

    /// Removes one occurrence of `element`.
    ///
    /// Fails with [`Error::NotPresent`] if any counter would go negative, in
    /// which case nothing changes. Removing an element that was never inserted
    /// can still succeed when other elements cover all of its cells; that is
    /// inherent to counting Bloom filters and corrupts the summary.
    pub fn remove(&mut self, element: &[u8]) -> Result<()> {
        let set = self.indexes(element);
        for (cell, n) in set.cell_multiplicities() {
            if u32::from(self.counters[cell]) < n {
                return Err(Error::NotPresent { cell });
            }
        }
        if self.inserted_count == 0 {
            // Unreachable while the sum invariant holds, but keep c from wrapping.
            return Err(Error::NotPresent { cell: set.as_slice()[0] });
        }
        for cell in set {
            self.counters[cell] -= 1;
        }
        self.inserted_count -= 1;
        Ok(())
    }

    /// `false` is definitive; `true` means the element might be present.
    pub fn contains(&self, element: &[u8]) -> bool {
        self.indexes(element).as_slice().iter().all(|&cell| self.counters[cell] != 0)
    }

    pub fn stats(&self) -> FilterStats {
        FilterStats {
            counter_sum: counter_sum(&self.counters),
            nonzero_cells: self.counters.iter().filter(|&&c| c != 0).count(),
            inserted_count: self.inserted_count,
            max_counter: self.counters.iter().copied().max().unwrap_or(0),
        }
    }
}

pub(crate) fn counter_sum(counters: &[u16]) -> u64 {
    counters.iter().map(|&c| u64::from(c)).sum()
}
