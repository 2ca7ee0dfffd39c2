//! Finite distributions, transition kernels, importance weights, the weighted
//! empirical measure, and total variation.

mod distribution;
mod empirical;
mod kernel;
pub mod random;
mod weight;

pub use distribution::{tv_distance, FiniteDistribution};
pub use empirical::WeightedEmpirical;
pub use kernel::{metropolis_kernel, KernelMatrix};
pub use weight::{acceptance_ratio, WeightFunction};

pub(crate) use distribution::check_len;
