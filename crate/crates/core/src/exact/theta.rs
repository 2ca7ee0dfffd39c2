//! Frozen-measure kernels: `P_theta = (1 - eps) P + eps theta`, the
//! equi-energy kernel `K_theta`, and the invariant law `pi_theta` of `P_theta`.

use crate::error::{Error, Result};
use crate::prob::{check_len, tv_distance, FiniteDistribution, KernelMatrix, WeightFunction};

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Argument(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    Ok(())
}

/// Row `i` is `(1 - eps) P_i + eps theta`.
pub fn p_theta_kernel(p: &KernelMatrix, theta: &FiniteDistribution, eps: f64) -> Result<KernelMatrix> {
    check_epsilon(eps)?;
    mixture_with_rows(p, eps, |_| theta.probs().to_vec(), theta.len())
}

/// `(1 - eps) P + eps K` for two kernels of equal size.
pub fn mix_kernels(p: &KernelMatrix, k: &KernelMatrix, eps: f64) -> Result<KernelMatrix> {
    check_epsilon(eps)?;
    mixture_with_rows(p, eps, |i| k.row(i).to_vec(), k.size())
}

fn mixture_with_rows(
    p: &KernelMatrix,
    eps: f64,
    row: impl Fn(usize) -> Vec<f64>,
    len: usize,
) -> Result<KernelMatrix> {
    check_len(p.size(), len)?;
    let s = p.size();
    let mut entries = Vec::with_capacity(s * s);
    for i in 0..s {
        let other = row(i);
        entries.extend(
            p.row(i)
                .iter()
                .zip(&other)
                .map(|(a, b)| (1.0 - eps) * a + eps * b),
        );
    }
    Ok(KernelMatrix::from_computed(s, entries))
}

/// Equi-energy kernel: propose `z ~ theta`, accept with `1 ∧ w(z)/w(x)`.
pub fn k_theta_exact(theta: &FiniteDistribution, w: &WeightFunction) -> Result<KernelMatrix> {
    check_len(theta.len(), w.len())?;
    let s = theta.len();
    let mut entries = vec![0.0; s * s];
    for x in 0..s {
        let mut moved = 0.0;
        for z in (0..s).filter(|z| *z != x) {
            let m = theta.get(z) * w.acceptance(x, z)?;
            entries[x * s + z] = m;
            moved += m;
        }
        entries[x * s + x] = (1.0 - moved).max(0.0);
    }
    Ok(KernelMatrix::from_computed(s, entries))
}

/// Terms kept from the geometric series so that the tail `(1 - eps)^J <= tol`.
pub fn truncation_terms(eps: f64, tol: f64) -> Result<usize> {
    if eps <= 0.0 {
        return Err(Error::DivergentSeries(
            "epsilon = 0 leaves pi_theta undefined".into(),
        ));
    }
    check_epsilon(eps)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Argument(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    if eps >= 1.0 {
        return Ok(1);
    }
    let j = (tol.ln() / (1.0 - eps).ln()).ceil();
    Ok((j as usize).max(1))
}

/// `pi_theta = eps sum_j (1 - eps)^j theta P^j`, truncated and renormalized.
pub fn pi_theta(
    p: &KernelMatrix,
    theta: &FiniteDistribution,
    eps: f64,
    tol: f64,
) -> Result<FiniteDistribution> {
    check_len(p.size(), theta.len())?;
    let terms = truncation_terms(eps, tol)?;
    let mut acc = vec![0.0; theta.len()];
    let mut v = theta.probs().to_vec();
    let mut coefficient = eps;
    for j in 0..terms {
        if j > 0 {
            v = p.apply_slice(&v);
            coefficient *= 1.0 - eps;
        }
        for (a, x) in acc.iter_mut().zip(&v) {
            *a += coefficient * x;
        }
    }
    FiniteDistribution::from_weights(acc)
}

/// `TV(δ_x P_theta^n, pi_theta)`.
pub fn geometric_mixing_check(
    p: &KernelMatrix,
    theta: &FiniteDistribution,
    eps: f64,
    x: usize,
    n: usize,
    tol: f64,
) -> Result<f64> {
    let target = pi_theta(p, theta, eps, tol)?;
    let kernel = p_theta_kernel(p, theta, eps)?;
    let mut law = FiniteDistribution::point(p.size(), x)?;
    for _ in 0..n {
        law = kernel.apply(&law)?;
    }
    tv_distance(&law, &target)
}
