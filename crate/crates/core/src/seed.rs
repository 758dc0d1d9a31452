//! Stable derivation of independent sub-seeds.

/// One SplitMix64 output step.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Named random streams of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Population = 1,
    Dynamics = 2,
    Initial = 3,
    Strengths = 4,
}

/// Seed of `stream` in replicate `index` under `master`. Depends only on its
/// arguments, never on evaluation order.
pub fn derive(master: u64, index: u64, stream: Stream) -> u64 {
    mix64(mix64(mix64(master) ^ index) ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed shared by every replicate, e.g. for a fixed population.
pub fn shared(master: u64, stream: Stream) -> u64 {
    derive(master, u64::MAX, stream)
}
