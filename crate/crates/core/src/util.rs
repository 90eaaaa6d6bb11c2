use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::BoxRegion;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in the base of the `axis`-th prime.
pub fn halton(index: u64, axis: usize) -> f64 {
    let base = PRIMES[axis % PRIMES.len()];
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from a box.
pub fn sample_box<R: rand::Rng>(rng: &mut R, b: &BoxRegion) -> Vec<f64> {
    b.lo
        .iter()
        .zip(&b.hi)
        .map(|(lo, hi)| if hi > lo { rng.random_range(*lo..*hi) } else { *lo })
        .collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
