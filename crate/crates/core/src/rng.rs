//! Seeded random streams.
//!
//! Every stochastic quantity draws from a ChaCha8 generator keyed by the
//! master seed and a stream index, so a trajectory's samples depend only on
//! `(seed, stream)` and never on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Parity-switching telegraph events.
pub const STREAM_PARITY: u64 = 0;
/// Offset-charge (TLS) jumps.
pub const STREAM_OFFSET_CHARGE: u64 = 1;
/// Synthetic measurement noise for fitting datasets.
pub const STREAM_DATA_NOISE: u64 = 2;
/// First stream used for per-pixel scan noise; pixel `k` uses `BASE + k`.
pub const STREAM_PIXEL_NOISE_BASE: u64 = 1 << 32;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for member `index` of an ensemble started from `master`.
///
/// SplitMix64 finaliser; distinct indices give well separated seeds.
pub fn ensemble_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
