//! Exact marginals of a ladder whose levels share one target, so every weight
//! is one and `E theta_hat` at level `l` is the Cesàro average of level `l - 1`'s laws.

use super::oracle::{exact_irmcmc_laws, EtaSequence};
use crate::error::{Error, Result};
use crate::prob::{FiniteDistribution, KernelMatrix};

/// `eta_0 = δ_start` and `eta_k = (1/k) sum_{i=1..k} laws[i]`.
pub fn cesaro_of_laws(laws: &[FiniteDistribution], start: usize) -> Result<EtaSequence> {
    let s = laws
        .first()
        .ok_or_else(|| Error::Argument("no laws".into()))?
        .len();
    let mut sum = vec![0.0; s];
    let mut etas = vec![FiniteDistribution::point(s, start)?];
    for (k, law) in laws.iter().enumerate().skip(1) {
        for (a, b) in sum.iter_mut().zip(law.probs()) {
            *a += b;
        }
        etas.push(FiniteDistribution::from_computed(
            sum.iter().map(|v| v / k as f64).collect(),
        ));
    }
    EtaSequence::new(etas)
}

/// `L(X^(l)_0..n)` for every level, level 0 first. All kernels must share
/// the stationary law; that is what makes the recursion linear.
pub fn unit_weight_ladder_laws(
    kernels: &[KernelMatrix],
    starts: &[usize],
    eps: f64,
    n: usize,
) -> Result<Vec<Vec<FiniteDistribution>>> {
    if kernels.is_empty() || kernels.len() != starts.len() {
        return Err(Error::Argument(
            "need one start per kernel and at least one level".into(),
        ));
    }
    let s = kernels[0].size();
    let mut level0 = vec![FiniteDistribution::point(s, starts[0])?];
    let mut law = level0[0].clone().into_vec();
    for _ in 0..n {
        law = kernels[0].apply_slice(&law);
        level0.push(FiniteDistribution::from_computed(law.clone()));
    }
    let mut out = vec![level0];
    for level in 1..kernels.len() {
        let etas = cesaro_of_laws(&out[level - 1], starts[level - 1])?;
        out.push(exact_irmcmc_laws(&kernels[level], eps, &etas, starts[level], n)?);
    }
    Ok(out)
}
