//! Random finite models for property checks and randomized suites.

use rand::Rng;

use super::{FiniteDistribution, KernelMatrix};

/// A strictly positive distribution on `s` states, each mass at least
/// `floor / s` before normalization.
pub fn random_distribution<R: Rng + ?Sized>(s: usize, floor: f64, rng: &mut R) -> FiniteDistribution {
    let raw: Vec<f64> = (0..s).map(|_| floor + rng.random::<f64>()).collect();
    FiniteDistribution::from_weights(raw).expect("positive masses")
}

/// A kernel with strictly positive rows, hence irreducible and aperiodic.
pub fn random_kernel<R: Rng + ?Sized>(s: usize, floor: f64, rng: &mut R) -> KernelMatrix {
    let entries = (0..s)
        .flat_map(|_| random_distribution(s, floor, rng).into_vec())
        .collect();
    KernelMatrix::from_computed(s, entries)
}

/// Random bounded weights in `[lo, hi]`.
pub fn random_weights<R: Rng + ?Sized>(s: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..s).map(|_| rng.random_range(lo..=hi)).collect()
}
