//! Deterministic random substreams derived from a root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream for `(seed, label, index)`; equal inputs always give equal streams.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(label) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
