//! Seeded random streams.
//!
//! All randomness goes through ChaCha8, which is counter based and gives the
//! same stream on every platform for a given seed. Independent sub-streams
//! (one per trial, per sample size, ...) are derived by hashing the parent
//! seed with a list of stream labels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for the stream labelled `labels` under `seed`.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix(seed), |acc, &l| splitmix(acc ^ splitmix(l.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn child(seed: u64, labels: &[u64]) -> Rng {
    rng(derive_seed(seed, labels))
}
