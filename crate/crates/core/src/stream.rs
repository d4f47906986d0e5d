//! Counter-based random streams: every draw is a pure function of
//! (seed, salt, indices), so runs replay exactly and node streams stay
//! independent without shared mutable state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche for key derivation.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic ChaCha generator keyed by the given words.
pub fn keyed_rng(parts: &[u64]) -> ChaCha8Rng {
    let mut h = 0x243F_6A88_85A3_08D3u64; // arbitrary nonzero start
    for p in parts {
        h = mix64(h ^ *p);
    }
    let mut key = [0u8; 32];
    for (chunk_idx, chunk) in key.chunks_exact_mut(8).enumerate() {
        h = mix64(h ^ chunk_idx as u64);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_replay() {
        let a: f64 = keyed_rng(&[7, 1, 2]).random();
        let b: f64 = keyed_rng(&[7, 1, 2]).random();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ_by_index() {
        let a: u64 = keyed_rng(&[7, 1, 2]).random();
        let b: u64 = keyed_rng(&[7, 1, 3]).random();
        let c: u64 = keyed_rng(&[7, 2, 2]).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
