//! Seeded random streams.
//!
//! Every random consumer derives its generator from a master seed and a
//! 64-bit stream id via [`stream_rng`]. Stream ids are built with
//! [`stream_id`] from a small-integer `(major, minor)` pair, so a given
//! `(seed, major, minor)` always yields the same ChaCha8 keystream no matter
//! which thread consumes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pauli::BlochVector;

/// `(major << 32) | minor`.
pub fn stream_id(major: u32, minor: u32) -> u64 {
    (u64::from(major) << 32) | u64::from(minor)
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A direction drawn uniformly from the unit sphere.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let u: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - u * u).max(0.0).sqrt();
    BlochVector::new(s * phi.cos(), s * phi.sin(), u)
}
