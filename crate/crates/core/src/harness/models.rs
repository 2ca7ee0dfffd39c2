//! Fixed finite models used by the acceptance criteria and the suites.

use crate::error::Result;
use crate::exact::{mix_kernels, TwoStateAux};
use crate::prob::{metropolis_kernel, FiniteDistribution, KernelMatrix};
use crate::samplers::{FiniteModel, LadderSpec};

/// Two-state example: `P(x, ·) = pi`, `w ≡ 1`, auxiliary flip rates `a = b = 1/3`,
/// auxiliary start `-1` (index 1).
pub fn example_model() -> Result<(FiniteModel, TwoStateAux)> {
    let aux = TwoStateAux::new(1.0 / 3.0, 1.0 / 3.0, -1)?;
    let pi = aux.stationary();
    let model = FiniteModel::new(pi.clone(), pi.clone(), KernelMatrix::constant(&pi), aux.kernel())?;
    Ok((model, aux))
}

pub const EXAMPLE_EPSILON: f64 = 0.3;

/// `pi^t`, normalized.
pub fn tempered(pi: &FiniteDistribution, t: f64) -> Result<FiniteDistribution> {
    FiniteDistribution::from_weights(pi.probs().iter().map(|p| p.powf(t)).collect())
}

/// Metropolis with a uniform proposal, held in place with probability `hold`.
pub fn lazy_metropolis(pi: &FiniteDistribution, hold: f64) -> Result<KernelMatrix> {
    let uniform = KernelMatrix::constant(&FiniteDistribution::uniform(pi.len())?);
    let m = metropolis_kernel(pi, &uniform)?;
    mix_kernels(&KernelMatrix::identity(pi.len()), &m, 1.0 - hold)
}

/// With probability `1 - gamma` redraw from `pi` restricted to the current
/// block (`{0}` or the rest), otherwise from `pi`. Reversible for `pi`, with
/// a single slow mode of eigenvalue `1 - gamma`.
pub fn two_block_kernel(pi: &FiniteDistribution, gamma: f64) -> Result<KernelMatrix> {
    let s = pi.len();
    let head = pi.get(0);
    let rows = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    let within = match (i == 0, j == 0) {
                        (true, true) => 1.0,
                        (false, false) => pi.get(j) / (1.0 - head),
                        _ => 0.0,
                    };
                    (1.0 - gamma) * within + gamma * pi.get(j)
                })
                .collect()
        })
        .collect();
    KernelMatrix::new(rows)
}

/// Four-state equi-energy model: `pi_Y = pi^{1/2}`, sticky Metropolis moves,
/// both chains started in the lightest state.
pub struct EeRateModel {
    pub model: FiniteModel,
    pub epsilon: f64,
    pub start: usize,
}

pub fn ee_rate_model() -> Result<EeRateModel> {
    let pi = FiniteDistribution::new(vec![0.5, 0.3, 0.15, 0.05])?;
    let pi_y = tempered(&pi, 0.5)?;
    let model = FiniteModel::new(
        pi.clone(),
        pi_y.clone(),
        lazy_metropolis(&pi, 0.95)?,
        lazy_metropolis(&pi_y, 0.95)?,
    )?;
    Ok(EeRateModel {
        model,
        epsilon: 0.1,
        start: 3,
    })
}

/// Three-level tempered ladder on four states, temperatures `0.2, 0.6, 1`.
/// Level 0 leaves its start block at rate `1/16`; every level starts in the
/// lightest state.
pub fn tempered_ladder() -> Result<LadderSpec> {
    let pi = FiniteDistribution::new(vec![0.5, 0.2, 0.2, 0.1])?;
    let targets = [0.2, 0.6, 1.0]
        .iter()
        .map(|t| tempered(&pi, *t))
        .collect::<Result<Vec<_>>>()?;
    let kernels = targets
        .iter()
        .enumerate()
        .map(|(l, t)| two_block_kernel(t, if l == 0 { 1.0 / 16.0 } else { 0.1 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(LadderSpec {
        targets,
        kernels,
        starts: vec![3, 3, 3],
        epsilon: 0.5,
        weight_bound: None,
    })
}

/// The ladder's first two levels, which form a plain importance-resampling pair.
pub fn single_level_ladder() -> Result<LadderSpec> {
    let mut spec = tempered_ladder()?;
    spec.targets.truncate(2);
    spec.kernels.truncate(2);
    spec.starts.truncate(2);
    Ok(spec)
}
