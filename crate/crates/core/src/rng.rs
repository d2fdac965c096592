//! Counter-based random streams.
//!
//! Every randomized routine receives a master seed and derives independent
//! ChaCha streams from `(master, purpose, index)`. Results therefore depend
//! only on the arguments, never on scheduling or worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose tags occupy the upper 16 bits of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Purpose {
    Medium = 1,
    Resample = 2,
    Path = 3,
    BinVolume = 4,
    BallVolume = 5,
    GeometrySample = 6,
    Cut = 7,
    Spanning = 8,
    InitialDatum = 9,
    Covariance = 10,
    Sweep = 11,
    Coefficient = 12,
    Eigen = 13,
}

fn stream_id(purpose: Purpose, index: u64) -> u64 {
    ((purpose as u64) << 48) ^ (index & 0x0000_ffff_ffff_ffff)
}

/// A reproducible generator for `(master, purpose, index)`.
pub fn stream(master: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(purpose, index));
    rng
}

/// A child seed for `(master, purpose, index)`.
pub fn derive_seed(master: u64, purpose: Purpose, index: u64) -> u64 {
    stream(master, purpose, index).next_u64()
}
