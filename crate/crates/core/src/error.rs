use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid filter config: {0}")]
    InvalidConfig(&'static str),

    #[error("counter overflow at cell {cell}")]
    CounterOverflow { cell: usize },

    #[error("element not present: counter at cell {cell} would go negative")]
    NotPresent { cell: usize },

    #[error("filter is empty (inserted count is 0)")]
    EmptyFilter,

    #[error("sample is empty")]
    EmptySample,

    #[error("filter ensemble is empty")]
    EmptyEnsemble,

    #[error("inconsistent state: counter sum {sum} != {m} hashes x {count} inserted")]
    InconsistentState { sum: u64, m: u32, count: u64 },

    #[error("invalid log base {0}; must be finite and > 1")]
    InvalidLogBase(f64),

    #[error("bad magic: expected \"CBF1\", found {0:02x?}")]
    BadMagic([u8; 4]),

    #[error("unsupported version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported counter width {0}")]
    UnsupportedCounterWidth(u8),

    #[error("truncated file: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: u64, found: u64 },

    #[error("trailing data: expected {expected} bytes, found more")]
    TrailingData { expected: u64 },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
