//! Seeded random draws shared by the sampling oracles and instance generators.
//!
//! Every random quantity in the crate is derived from a single `u64` seed.
//! Independent streams are obtained with [`sub_seed`], a counter-based split:
//! stream `i` of seed `s` is `splitmix64(s + (i + 1) * 0x9E37_79B9_7F4A_7C15)`.
//! The resulting value seeds a ChaCha8 generator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of stream `stream` from `seed`.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    rng_from_seed(sub_seed(seed, stream))
}

/// A complex number uniformly distributed (by area) on the annulus
/// `0.5 <= |z| <= 1.5`. Used for generic parameter draws.
pub fn annulus_sample<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r2: f64 = rng.random_range(0.25..=2.25);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r2.sqrt(), theta)
}

/// Real scalar uniform on `[-1, 1]`.
pub fn unit_real<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..=1.0)
}

/// Complex scalar with real and imaginary parts uniform on `[-1, 1]`.
pub fn unit_box_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(unit_real(rng), unit_real(rng))
}

pub fn annulus_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix_unchecked(DMatrix::from_fn(rows, cols, |_, _| annulus_sample(rng)))
}

/// Real matrix with entries uniform on `[-1, 1]`, stored as complex.
pub fn real_uniform_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix_unchecked(DMatrix::from_fn(rows, cols, |_, _| Complex64::new(unit_real(rng), 0.0)))
}

pub fn complex_uniform_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix_unchecked(DMatrix::from_fn(rows, cols, |_, _| unit_box_complex(rng)))
}
