//! Counter-based random substreams.
//!
//! Every parallel unit of work (replicate, dataset, chain) draws from a
//! stream keyed by the master seed and a path of indices, so results do not
//! depend on scheduling or worker count. Replicate m always consumes
//! substream m.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream roles within one estimator replicate.
pub const ROLE_ANCHOR: u64 = 0;
pub const ROLE_PERMUTATION: u64 = 1;
pub const ROLE_ROLLOUT: u64 = 2;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator keyed by `(seed, path)`. Identical on every
/// platform and for every thread schedule.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0xD1B5_4A32_D192_ED03;
    let mut lanes = [splitmix64(&mut state), 0, 0, 0];
    for (i, &component) in path.iter().enumerate() {
        state ^= component
            .wrapping_add(0xA076_1D64_78BD_642F)
            .rotate_left((i % 63) as u32);
        lanes[(i + 1) % 4] ^= splitmix64(&mut state);
    }
    for lane in lanes.iter_mut() {
        *lane ^= splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for (i, lane) in lanes.iter().enumerate() {
        key[i * 8..(i + 1) * 8].copy_from_slice(&lane.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derive an independent child seed for an experiment unit (dataset, path,
/// grid point).
pub fn child_seed(seed: u64, tag: u64, index: u64) -> u64 {
    let mut state = seed
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    splitmix64(&mut state)
}
