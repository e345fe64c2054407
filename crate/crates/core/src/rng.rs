//! Seeded, splittable random streams.
//!
//! Every random source is a ChaCha8 stream addressed by `(seed, purpose, index)`.
//! ChaCha is counter based, so streams never overlap and any one of them can be
//! regenerated without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for; distinct purposes never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    VertexProcess = 1,
    BirthEdges = 2,
    PairUniforms = 3,
    Tree = 4,
    Mixture = 5,
    Resample = 6,
    Sampling = 7,
    Bootstrap = 8,
    Replica = 9,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes two words into a new seed, e.g. to derive per-replica seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(&mut s);
    splitmix64(&mut s)
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut state = seed ^ (purpose as u64).rotate_left(48);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
