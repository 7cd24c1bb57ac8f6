//! Deterministic generator derivation.
//!
//! Every randomized routine takes either an explicit generator or a `(seed,
//! stream)` pair. Streams are mapped to independent ChaCha channels, so draw
//! `i` of a Monte-Carlo loop is the same whether the loop runs serially or
//! under rayon.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of master seed `seed`.
///
/// Same key, distinct counter stream: streams never overlap.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a sub-seed for an independent purpose (`salt` names the purpose).
pub fn derive(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
