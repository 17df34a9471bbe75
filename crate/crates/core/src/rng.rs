//! Named, indexed RNG substreams derived from a single 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, label, index)`. Streams with different
/// labels or indices never share state, so work items can be evaluated in any
/// order without changing their draws.
pub fn substream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)));
    rng.set_stream(fnv1a(label));
    rng
}

/// Derives a child seed, for handing a sub-task its own `seed` argument.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(seed ^ fnv1a(label).rotate_left(17) ^ splitmix64(index))
}
