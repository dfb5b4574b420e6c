//! `CBF1` on-disk format and a JSON export.
//!
//! Binary layout, all integers little-endian:
//!
//! | offset | width | field            |
//! |--------|-------|------------------|
//! | 0      | 4     | magic `"CBF1"`   |
//! | 4      | 2     | version (1)      |
//! | 6      | 1     | counter width (16) |
//! | 7      | 1     | reserved (0)     |
//! | 8      | 4     | num_hashes       |
//! | 12     | 8     | size             |
//! | 20     | 8     | seed             |
//! | 28     | 8     | inserted_count   |
//! | 36     | 2·size | counters        |
//!
//! No padding, no trailing bytes.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::filter::{CountingBloomFilter, FilterConfig, COUNTER_WIDTH};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CBF1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 36;

/// Total file length for a filter of `size` cells.
pub fn file_len(size: usize) -> u64 {
    HEADER_LEN as u64 + 2 * size as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterFileHeader {
    pub magic: [u8; 4],
    pub version: u16,
    pub counter_width: u8,
    pub reserved: u8,
    pub num_hashes: u32,
    pub size: u64,
    pub seed: u64,
    pub inserted_count: u64,
}

impl FilterFileHeader {
    pub fn for_filter(filter: &CountingBloomFilter) -> Self {
        let cfg = filter.config();
        Self {
            magic: MAGIC,
            version: VERSION,
            counter_width: COUNTER_WIDTH,
            reserved: 0,
            num_hashes: cfg.num_hashes(),
            size: cfg.size() as u64,
            seed: cfg.seed(),
            inserted_count: filter.inserted_count(),
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&self.magic);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6] = self.counter_width;
        b[7] = self.reserved;
        b[8..12].copy_from_slice(&self.num_hashes.to_le_bytes());
        b[12..20].copy_from_slice(&self.size.to_le_bytes());
        b[20..28].copy_from_slice(&self.seed.to_le_bytes());
        b[28..36].copy_from_slice(&self.inserted_count.to_le_bytes());
        b
    }

    /// Decodes and validates magic, version and counter width.
    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self> {
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        let header = Self {
            magic: b[0..4].try_into().unwrap(),
            version: u16::from_le_bytes([b[4], b[5]]),
            counter_width: b[6],
            reserved: b[7],
            num_hashes: u32::from_le_bytes(b[8..12].try_into().unwrap()),
            size: u64_at(12),
            seed: u64_at(20),
            inserted_count: u64_at(28),
        };
        if header.magic != MAGIC {
            return Err(Error::BadMagic(header.magic));
        }
        if header.version != VERSION {
            return Err(Error::UnsupportedVersion(header.version));
        }
        if header.counter_width != COUNTER_WIDTH {
            return Err(Error::UnsupportedCounterWidth(header.counter_width));
        }
        Ok(header)
    }
}

/// Writes `filter` in `CBF1` format and returns the number of bytes written.
pub fn save<W: Write>(filter: &CountingBloomFilter, mut sink: W) -> Result<u64> {
    sink.write_all(&FilterFileHeader::for_filter(filter).to_bytes())?;
    let mut body = Vec::with_capacity(2 * filter.counters().len());
    for &c in filter.counters() {
        body.extend_from_slice(&c.to_le_bytes());
    }
    sink.write_all(&body)?;
    sink.flush()?;
    Ok(file_len(filter.counters().len()))
}

/// Reads exactly one `CBF1` filter from `source`, which must end right after it.
pub fn load<R: Read>(source: R) -> Result<CountingBloomFilter> {
    let mut source = source;
    let mut head = [0u8; HEADER_LEN];
    let got = read_full(&mut source, &mut head)?;
    if got < HEADER_LEN {
        return Err(Error::TruncatedFile { expected: HEADER_LEN as u64, found: got as u64 });
    }
    let header = FilterFileHeader::from_bytes(&head)?;
    let size =
        usize::try_from(header.size).map_err(|_| Error::InvalidConfig("size does not fit in memory"))?;
    let config = FilterConfig::new(size, header.num_hashes, header.seed)?;
    let expected = file_len(size);

    // Grow as data arrives rather than trusting `size` for the allocation.
    let mut body = Vec::new();
    let want = 2 * header.size;
    let read = source.by_ref().take(want).read_to_end(&mut body)? as u64;
    if read < want {
        return Err(Error::TruncatedFile { expected, found: HEADER_LEN as u64 + read });
    }
    let mut extra = [0u8; 1];
    if read_full(&mut source, &mut extra)? != 0 {
        return Err(Error::TrailingData { expected });
    }

    let counters = body.chunks_exact(2).map(|p| u16::from_le_bytes([p[0], p[1]])).collect();
    CountingBloomFilter::from_parts(config, counters, header.inserted_count)
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..]) {
            Ok(0) => break,
            Ok(k) => n += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(n)
}

/// JSON shape of a filter. Field order is fixed for diff-stable output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterJson {
    pub size: u64,
    pub m: u32,
    pub seed: u64,
    pub inserted_count: u64,
    pub counters: Vec<u16>,
}

pub fn export_json(filter: &CountingBloomFilter) -> String {
    let cfg = filter.config();
    let doc = FilterJson {
        size: cfg.size() as u64,
        m: cfg.num_hashes(),
        seed: cfg.seed(),
        inserted_count: filter.inserted_count(),
        counters: filter.counters().to_vec(),
    };
    serde_json::to_string(&doc).expect("plain integers always serialize")
}

/// Inverse of [`export_json`]; validates the same invariants as [`load`].
pub fn import_json(text: &str) -> Result<CountingBloomFilter> {
    let doc: FilterJson = serde_json::from_str(text)?;
    let size = usize::try_from(doc.size).map_err(|_| Error::InvalidConfig("size does not fit in memory"))?;
    let config = FilterConfig::new(size, doc.m, doc.seed)?;
    CountingBloomFilter::from_parts(config, doc.counters, doc.inserted_count)
}
