//! Seeded low-discrepancy sample points: a Halton sequence with a random
//! Cranley–Patterson shift drawn from ChaCha.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Largest supported unit-cube dimension.
pub const MAX_DIM: usize = PRIMES.len();

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % b) as f64 * scale;
        index /= b;
        scale *= inv;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaltonSampler {
    shift: Vec<f64>,
}

impl HaltonSampler {
    /// # Panics
    /// If `dim` exceeds [`MAX_DIM`].
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= MAX_DIM, "at most {MAX_DIM} dimensions");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { shift: (0..dim).map(|_| rng.random::<f64>()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// Point `i` of the shifted sequence, in `[0, 1)^dim`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        // index 0 of the raw sequence is the origin; start at 1
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(s, p)| {
                let v = radical_inverse(i as u64 + 1, p) + s;
                v - v.floor()
            })
            .collect()
    }

    pub fn points(&self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|i| self.point(i)).collect()
    }
}

/// Axis-aligned box for the real and imaginary parts of every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDomain {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Default for SampleDomain {
    fn default() -> Self {
        Self { re: (-0.5, 0.5), im: (-0.5, 0.5) }
    }
}

/// `count` points of `ℂ^dim` inside `domain`.
pub fn chart_points(dim: usize, domain: SampleDomain, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let sampler = HaltonSampler::new(2 * dim, seed);
    let lerp = |(lo, hi): (f64, f64), u: f64| lo + (hi - lo) * u;
    (0..count)
        .map(|i| {
            let u = sampler.point(i);
            (0..dim).map(|k| Complex64::new(lerp(domain.re, u[2 * k]), lerp(domain.im, u[2 * k + 1]))).collect()
        })
        .collect()
}

/// As [`chart_points`], with a separate `(lo, hi)` range for the real and
/// imaginary part of each coordinate.
///
/// # Panics
/// If `re` and `im` differ in length.
pub fn box_points(re: &[(f64, f64)], im: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    assert_eq!(re.len(), im.len(), "one range per coordinate");
    let dim = re.len();
    let sampler = HaltonSampler::new(2 * dim, seed);
    let lerp = |(lo, hi): (f64, f64), u: f64| lo + (hi - lo) * u;
    (0..count)
        .map(|i| {
            let u = sampler.point(i);
            (0..dim).map(|k| Complex64::new(lerp(re[k], u[2 * k]), lerp(im[k], u[2 * k + 1]))).collect()
        })
        .collect()
}
