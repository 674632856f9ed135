//! Deterministic RNG sub-streams. Every random draw in a run is keyed by the run
//! seed, a module name and a path of indices, so results do not depend on thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, module: &str, path: &[u64]) -> ChaCha8Rng {
    // FNV-1a over the module name, then fold the path through splitmix.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in module.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    let mut key = splitmix(seed ^ h);
    for &p in path {
        key = splitmix(key ^ p);
    }
    ChaCha8Rng::seed_from_u64(key)
}
