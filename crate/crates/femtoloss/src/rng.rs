//! Deterministic RNG stream derivation. Every random consumer gets its own
//! stream keyed by (root seed, domain, unit, trial), so experiments are
//! bit-reproducible regardless of how trials are scheduled across threads.
//!
//! Derivation: a SplitMix64 finalizer chain folds the three stream
//! coordinates into the root seed, then four more finalizer steps expand the
//! state into the 32-byte ChaCha12 key. ChaCha12 is pinned (rather than the
//! library default generator) so streams stay stable across dependency
//! upgrades.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SALT_MULT: u64 = 0xD605_BBB5_8C8A_BC2D;

fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the RNG stream for `(domain, unit, trial)` under `root_seed`.
pub fn derive_stream(root_seed: u64, domain: u64, unit: u64, trial: u64) -> ChaCha12Rng {
    let mut state = root_seed;
    for salt in [domain, unit, trial] {
        state = finalize(
            state
                .wrapping_add(GOLDEN)
                .wrapping_add(salt.wrapping_mul(SALT_MULT)),
        );
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&finalize(state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
