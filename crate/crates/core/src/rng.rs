//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, purpose, index)`: the seed and purpose form
//! the ChaCha key and the index selects the ChaCha stream. Shot `i` of a
//! simulation and resample `b` of a bootstrap therefore get the same numbers no
//! matter which thread draws them or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the random streams of different consumers sharing one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    ShotSampler = 0x5348_4f54,
    Bootstrap = 0x424f_4f54,
    /// Seeds of sub-experiments, such as the points of a sweep.
    Derived = 0x5345_4544,
}

/// Independent generator for `index` under `(seed, purpose)`.
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Seed for sub-experiment `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    substream(seed, Purpose::Derived, index).next_u64()
}
