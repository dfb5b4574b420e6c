//! Counting Bloom filter that can estimate the plugin (maximum-likelihood)
//! discrete entropy of the multiset it summarizes, straight from its counters.
//!
//! The crate is split into:
//!
//! - [`hash`]: FNV-1a 64 and the double-hashing index scheme.
//! - [`filter`]: the counting Bloom filter itself.
//! - [`entropy`]: exact plugin entropy, filter entropy (raw and `1/m`-scaled),
//!   ensemble max and the certain-collision detector.
//! - [`format`]: the `CBF1` binary file format and JSON export.
//! - [`cli`]: the `cbf` command-line front end.
//!
//! ```
//! use cbf_entropy::{CountingBloomFilter, FilterConfig, LogBase};
//!
//! let mut filter = CountingBloomFilter::new(FilterConfig::new(1024, 3, 0)?)?;
//! for word in ["A1", "A1", "B1", "C1"] {
//!     filter.insert(word.as_bytes())?;
//! }
//! let report = cbf_entropy::filter_entropy(&filter, LogBase::BITS)?;
//! assert!((report.corrected - 1.5).abs() < 1e-9);
//! # Ok::<(), cbf_entropy::Error>(())
//! ```

pub mod cli;
pub mod entropy;
mod error;
pub mod filter;
pub mod format;
pub mod hash;

pub use entropy::{
    bf_entropy, bf_entropy_uncorrected, certain_collision, ensemble_entropy, exact_plugin_entropy,
    filter_entropy, CollisionDiagnosis, EntropyReport, LogBase, SampleHistogram, ValueGroup,
};
pub use error::{Error, Result};
pub use filter::{CountingBloomFilter, FilterConfig, FilterStats, IndexSet, COUNTER_WIDTH};
