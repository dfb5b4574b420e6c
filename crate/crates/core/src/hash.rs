//! FNV-1a 64-bit hashing and the double-hashing index derivation.
//!
//! Every cell index is a pure function of `(seed, size, num_hashes, element)`,
//! so filters built by independent implementations agree bit for bit.

pub const FNV_OFFSET_BASIS: u64 = 14_695_981_039_346_656_037;
pub const FNV_PRIME: u64 = 1_099_511_628_211;

/// Domain tags separating the two base hashes.
const H1_TAG: u8 = 0x01;
const H2_TAG: u8 = 0x02;

/// Incremental FNV-1a 64 state.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a64(u64);

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self(FNV_OFFSET_BASIS)
    }
}

impl Fnv1a64 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// FNV-1a 64 over `bytes`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a64::new();
    h.write(bytes);
    h.finish()
}

fn tagged(seed: u64, tag: u8, element: &[u8]) -> u64 {
    let mut h = Fnv1a64::new();
    h.write(&seed.to_le_bytes());
    h.write(&[tag]);
    h.write(element);
    h.finish()
}

/// The two base hashes `(h1, h2)`: FNV-1a over `LE64(seed) || tag || element`.
pub fn base_pair(seed: u64, element: &[u8]) -> (u64, u64) {
    (tagged(seed, H1_TAG, element), tagged(seed, H2_TAG, element))
}

/// Appends `num_hashes` cell indexes for `element` to `out`.
///
/// `index_i = (h1 + i * stride) mod size`, evaluated exactly (no wraparound),
/// with `stride = h2 mod size` bumped to 1 when it is 0 and `size > 1`.
pub fn fill_indexes(seed: u64, size: u64, num_hashes: u32, element: &[u8], out: &mut Vec<usize>) {
    debug_assert!(size >= 1);
    let (h1, h2) = base_pair(seed, element);
    let mut stride = h2 % size;
    if stride == 0 && size > 1 {
        stride = 1;
    }
    let size = u128::from(size);
    let (h1, stride) = (u128::from(h1), u128::from(stride));
    out.extend((0..u128::from(num_hashes)).map(|i| ((h1 + i * stride) % size) as usize));
}
