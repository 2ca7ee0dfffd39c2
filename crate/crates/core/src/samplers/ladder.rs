//! Multiple IRMCMC: a ladder of chains targeting `pi_0, ..., pi_m`, where
//! level `l` resamples from level `l - 1`'s past with weights `pi_l / pi_{l-1}`.
//!
//! Levels advance in lockstep. At tick `n` level `l` sees samples `1..n-1` of
//! level `l - 1`, or `δ` at level `l - 1`'s start before any exist.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::INVARIANCE_TOLERANCE;
use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, KernelMatrix, WeightFunction, WeightedEmpirical};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderSpec {
    /// `pi_0, ..., pi_m`.
    pub targets: Vec<FiniteDistribution>,
    /// `P_l`, each leaving `pi_l` invariant.
    pub kernels: Vec<KernelMatrix>,
    /// Start state of every level.
    pub starts: Vec<usize>,
    pub epsilon: f64,
    /// Declared bound on every `w_l`; taken from the weights when absent.
    #[serde(default)]
    pub weight_bound: Option<f64>,
}

impl LadderSpec {
    /// Number of resampling levels `m`.
    pub fn levels(&self) -> usize {
        self.targets.len().saturating_sub(1)
    }

    /// `w_l = pi_l / pi_{l-1}` for `l = 1..=m`.
    pub fn weights(&self) -> Result<Vec<WeightFunction>> {
        self.targets
            .windows(2)
            .map(|pair| WeightFunction::from_densities(&pair[1], &pair[0]))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::Config("a ladder needs at least one level".into()));
        }
        check_len(self.targets.len(), self.kernels.len())?;
        check_len(self.targets.len(), self.starts.len())?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        let s = self.targets[0].len();
        for (level, (pi, k)) in self.targets.iter().zip(&self.kernels).enumerate() {
            check_len(s, pi.len())?;
            check_len(s, k.size())?;
            if self.starts[level] >= s {
                return Err(Error::Config(format!(
                    "start state {} of level {level} is outside 0..{s}",
                    self.starts[level]
                )));
            }
            let r = k.stationarity_residual(pi)?;
            if r > INVARIANCE_TOLERANCE {
                return Err(Error::Config(format!(
                    "kernel of level {level} does not leave its target invariant (residual {r:.3e})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Ladder {
    spec: LadderSpec,
    weights: Vec<WeightFunction>,
    bound: f64,
    states: Vec<usize>,
    // reservoirs[l - 1] holds level l-1's samples weighted by w_l
    reservoirs: Vec<WeightedEmpirical<usize>>,
    tick: usize,
}

impl Ladder {
    pub fn new(spec: LadderSpec) -> Result<Self> {
        spec.validate()?;
        let weights = spec.weights()?;
        let observed = weights.iter().map(WeightFunction::sup).fold(0.0, f64::max);
        let bound = match spec.weight_bound {
            Some(b) if observed > b => {
                return Err(Error::Domain(format!(
                    "ladder weight reaches {observed}, above the declared bound {b}"
                )))
            }
            Some(b) => b,
            None => observed,
        };
        Ok(Self {
            states: spec.starts.clone(),
            reservoirs: vec![WeightedEmpirical::new(); spec.levels()],
            weights,
            bound,
            spec,
            tick: 0,
        })
    }

    pub fn spec(&self) -> &LadderSpec {
        &self.spec
    }

    pub fn levels(&self) -> usize {
        self.spec.levels()
    }

    /// Current state of every level, level 0 first.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn ticks(&self) -> usize {
        self.tick
    }

    pub fn weight_bound(&self) -> f64 {
        self.bound
    }

    /// Advances every level by one step.
    pub fn tick<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let eps = self.spec.epsilon;
        let mut next = Vec::with_capacity(self.states.len());
        next.push(self.spec.kernels[0].sample(self.states[0], rng));
        for level in 1..self.states.len() {
            let coin: f64 = rng.random();
            let x = if coin < eps {
                let res = &self.reservoirs[level - 1];
                if res.is_empty() {
                    self.spec.starts[level - 1]
                } else {
                    res.sample(rng)?
                }
            } else {
                self.spec.kernels[level].sample(self.states[level], rng)
            };
            next.push(x);
        }
        for level in 1..next.len() {
            let y = next[level - 1];
            let w = self.weights[level - 1].value(y);
            if w > self.bound {
                return Err(Error::Domain(format!(
                    "weight {w} at level {level} exceeds the declared bound {}",
                    self.bound
                )));
            }
            self.reservoirs[level - 1].push(y, w)?;
        }
        self.states = next;
        self.tick += 1;
        Ok(())
    }
}
