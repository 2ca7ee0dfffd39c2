//! The joint chain `(X_n, Y_n)` of the modified equi-energy sampler, whose
//! proposal is the current auxiliary state. Product states are ordered
//! x-major: index `x * S + y`.

use super::two_state::TwoStateAux;
use crate::error::{Error, Result};
use crate::prob::{acceptance_ratio, check_len, FiniteDistribution, KernelMatrix};

fn ratio_weights(pi_x: &FiniteDistribution, pi_y: &FiniteDistribution) -> Result<Vec<f64>> {
    check_len(pi_x.len(), pi_y.len())?;
    pi_x.probs()
        .iter()
        .zip(pi_y.probs())
        .map(|(p, q)| {
            if *p <= 0.0 || *q <= 0.0 {
                Err(Error::Domain(
                    "joint kernel needs strictly positive densities".into(),
                ))
            } else {
                Ok(p / q)
            }
        })
        .collect()
}

/// Joint kernel with acceptance probabilities `alpha[x][z]` for the move to `z = y`.
fn joint_from_acceptance(
    p: Option<(&KernelMatrix, f64)>,
    p_y: &KernelMatrix,
    alpha: impl Fn(usize, usize) -> f64,
) -> KernelMatrix {
    let s = p_y.size();
    let n = s * s;
    let mut entries = vec![0.0; n * n];
    for x in 0..s {
        for y in 0..s {
            // law of the next main state
            let mut main = vec![0.0; s];
            let eps = p.map_or(1.0, |(_, e)| e);
            if let Some((base, e)) = p {
                for (m, q) in main.iter_mut().zip(base.row(x)) {
                    *m += (1.0 - e) * q;
                }
            }
            let a = if y == x { 1.0 } else { alpha(x, y) };
            main[y] += eps * a;
            main[x] += eps * (1.0 - a);
            let from = x * s + y;
            for (z, mz) in main.iter().enumerate() {
                for (w, qw) in p_y.row(y).iter().enumerate() {
                    entries[from * n + z * s + w] = mz * qw;
                }
            }
        }
    }
    KernelMatrix::from_computed(n, entries)
}

/// Joint kernel of the pure proposal-from-`Y_n` move: `K_{δ_y}(x, dz) P_Y(y, dw)`.
pub fn ee_joint_kernel(
    p_y: &KernelMatrix,
    pi_x: &FiniteDistribution,
    pi_y: &FiniteDistribution,
) -> Result<KernelMatrix> {
    check_len(p_y.size(), pi_x.len())?;
    let w = ratio_weights(pi_x, pi_y)?;
    Ok(joint_from_acceptance(None, p_y, |x, z| {
        acceptance_ratio(w[x], w[z]).expect("positive weights")
    }))
}

/// Joint kernel of the modified sampler, `(1 - eps) P + eps K_{δ_y}` in `x`.
pub fn modified_ee_joint_kernel(
    p: &KernelMatrix,
    p_y: &KernelMatrix,
    pi_x: &FiniteDistribution,
    pi_y: &FiniteDistribution,
    eps: f64,
) -> Result<KernelMatrix> {
    check_len(p_y.size(), p.size())?;
    check_len(p_y.size(), pi_x.len())?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Argument(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    let w = ratio_weights(pi_x, pi_y)?;
    Ok(joint_from_acceptance(Some((p, eps)), p_y, |x, z| {
        acceptance_ratio(w[x], w[z]).expect("positive weights")
    }))
}

/// Two-state joint kernel for arbitrary acceptance values `c = α(+1, -1)`,
/// `d = α(-1, +1)`.
pub fn two_state_joint_kernel(aux: &TwoStateAux, c: f64, d: f64) -> Result<KernelMatrix> {
    for (name, v) in [("c", c), ("d", d)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Argument(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(joint_from_acceptance(None, &aux.kernel(), |x, _| {
        if x == 0 {
            c
        } else {
            d
        }
    }))
}

/// Closed-form stationary law of the two-state joint chain.
pub fn ee_joint_stationary_closed_form(a: f64, b: f64, c: f64, d: f64) -> Result<FiniteDistribution> {
    let l = 1.0 - a - b;
    let denominator = (a + b) * (l * c * d + a * c + b * d);
    if denominator <= 0.0 {
        return Err(Error::Argument("closed form needs a positive normalizer".into()));
    }
    let numerators = [b * d * (b + l * c), a * b * d, a * b * c, a * c * (a + l * d)];
    FiniteDistribution::new(numerators.iter().map(|v| v / denominator).collect())
}
