//! Replicated runs and per-checkpoint state histograms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::FiniteDistribution;
use crate::samplers::{Chain, ChainConfig, ChainRng, Ladder, LadderSpec, Model};

/// Powers of two in `[lo, hi]`.
pub fn dyadic_checkpoints(lo: usize, hi: usize) -> Vec<usize> {
    (0..usize::BITS)
        .map(|k| 1usize << k)
        .take_while(|n| *n <= hi)
        .filter(|n| *n >= lo)
        .collect()
}

pub(crate) fn check_checkpoints(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Config(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Binned state of every replica at every checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEstimates {
    pub checkpoints: Vec<usize>,
    pub states: usize,
    /// `samples[k][r]` is replica `r`'s bin at checkpoint `k`.
    pub samples: Vec<Vec<u32>>,
}

impl MarginalEstimates {
    fn from_replicas(checkpoints: &[usize], states: usize, per_replica: Vec<Vec<u32>>) -> Self {
        let samples = (0..checkpoints.len())
            .map(|k| per_replica.iter().map(|r| r[k]).collect())
            .collect();
        Self {
            checkpoints: checkpoints.to_vec(),
            states,
            samples,
        }
    }

    pub fn replicas(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// A single replica gives point masses only.
    pub fn low_precision(&self) -> bool {
        self.replicas() < 2
    }

    pub fn counts(&self, k: usize) -> Vec<u64> {
        let mut counts = vec![0u64; self.states];
        for s in &self.samples[k] {
            counts[*s as usize] += 1;
        }
        counts
    }

    /// `p_hat_n(x) = (1/R) #{r : X_n^(r) = x}`.
    pub fn distribution(&self, k: usize) -> FiniteDistribution {
        let r = self.replicas() as f64;
        FiniteDistribution::from_computed(self.counts(k).iter().map(|c| *c as f64 / r).collect())
    }

    /// Multinomial standard errors `sqrt(p (1 - p) / R)`.
    pub fn stderr(&self, k: usize) -> Vec<f64> {
        let r = self.replicas() as f64;
        self.distribution(k)
            .probs()
            .iter()
            .map(|p| (p * (1.0 - p) / r).sqrt())
            .collect()
    }
}

/// Runs `replicas` independent chains; replica `r` draws from streams derived
/// from `(seed, r)`, so the result does not depend on scheduling.
pub fn estimate_marginals<M: Model>(
    model: &M,
    config: &ChainConfig<M::State>,
    checkpoints: &[usize],
    replicas: usize,
    seed: u64,
    states: usize,
    bin: impl Fn(M::State) -> usize + Sync,
) -> Result<MarginalEstimates> {
    check_checkpoints(checkpoints)?;
    if replicas == 0 {
        return Err(Error::Config("need at least one replica".into()));
    }
    let n_max = *checkpoints.last().expect("non-empty");
    let per_replica = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut chain = Chain::new(model, config, ChainRng::for_replica(seed, r))?;
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            for n in 1..=n_max {
                let x = chain.step()?;
                if n == checkpoints[next] {
                    let b = bin(x);
                    if b >= states {
                        return Err(Error::State(format!("bin {b} outside 0..{states}")));
                    }
                    out.push(b as u32);
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalEstimates::from_replicas(checkpoints, states, per_replica))
}

/// Per-level marginals of a ladder, level 0 first.
pub fn estimate_ladder_marginals(
    spec: &LadderSpec,
    checkpoints: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<Vec<MarginalEstimates>> {
    check_checkpoints(checkpoints)?;
    let template = Ladder::new(spec.clone())?;
    let levels = spec.targets.len();
    let states = spec.targets[0].len();
    let n_max = *checkpoints.last().expect("non-empty");
    let per_replica = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut ladder = template.clone();
            let mut rng = ChainRng::for_replica(seed, r).main;
            let mut out = vec![Vec::with_capacity(checkpoints.len()); levels];
            let mut next = 0;
            for n in 1..=n_max {
                ladder.tick(&mut rng)?;
                if n == checkpoints[next] {
                    for (o, s) in out.iter_mut().zip(ladder.states()) {
                        o.push(*s as u32);
                    }
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..levels)
        .map(|level| {
            let rows = per_replica.iter().map(|r| r[level].clone()).collect();
            MarginalEstimates::from_replicas(checkpoints, states, rows)
        })
        .collect())
}
