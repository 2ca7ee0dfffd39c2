//! Step functions for the importance-resampling (IRMCMC), equi-energy (EE)
//! and modified equi-energy samplers.
//!
//! Within one step the main chain moves first, using the resampling measure
//! built from auxiliary samples `Y_1..Y_{n-1}` (or `δ_{y0}` before any
//! auxiliary sample exists); the auxiliary chain then advances and its new
//! state is pushed into the reservoir.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::Model;
use super::rng::ChainRng;
use crate::error::{Error, Result};
use crate::prob::{acceptance_ratio, WeightedEmpirical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Irmcmc,
    Ee,
    ModifiedEe,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Irmcmc => "irmcmc",
            Algorithm::Ee => "ee",
            Algorithm::ModifiedEe => "modified-ee",
        }
    }
}

/// Live state of one adaptive chain.
#[derive(Debug, Clone)]
pub struct ChainState<S> {
    x: S,
    y: S,
    y0: S,
    reservoir: WeightedEmpirical<S>,
    n: usize,
    epsilon: f64,
    algorithm: Algorithm,
}

impl<S: Copy + PartialEq> ChainState<S> {
    pub fn new(algorithm: Algorithm, epsilon: f64, x0: S, y0: S) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        Ok(Self {
            x: x0,
            y: y0,
            y0,
            reservoir: WeightedEmpirical::new(),
            n: 0,
            epsilon,
            algorithm,
        })
    }

    pub fn x(&self) -> S {
        self.x
    }

    pub fn y(&self) -> S {
        self.y
    }

    /// Number of completed steps.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// Auxiliary samples `Y_1..Y_n` with their weights. The initial `δ_{y0}`
    /// is not stored here; it is used only while the reservoir is empty.
    pub fn reservoir(&self) -> &WeightedEmpirical<S> {
        &self.reservoir
    }

    /// Freezes a snapshot with an explicit reservoir, for one-step checks.
    pub fn with_reservoir(mut self, reservoir: WeightedEmpirical<S>) -> Self {
        self.n = reservoir.len();
        self.reservoir = reservoir;
        self
    }

    /// Draw from the current resampling measure `θ̂_n`.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<S> {
        if self.reservoir.is_empty() {
            Ok(self.y0)
        } else {
            self.reservoir.sample(rng)
        }
    }

    fn expect(&self, algorithm: Algorithm) -> Result<()> {
        if self.algorithm != algorithm {
            return Err(Error::State(format!(
                "chain runs {}, not {}",
                self.algorithm.name(),
                algorithm.name()
            )));
        }
        Ok(())
    }

    /// Next main-chain state from the frozen snapshot; neither the state nor
    /// the auxiliary chain changes.
    pub fn propose_main<M, R>(&self, model: &M, rng: &mut R) -> Result<S>
    where
        M: Model<State = S>,
        R: Rng + ?Sized,
    {
        let coin: f64 = rng.random();
        if coin >= self.epsilon {
            return Ok(model.base_step(self.x, rng));
        }
        match self.algorithm {
            Algorithm::Irmcmc => self.resample(rng),
            Algorithm::Ee => {
                let z = self.resample(rng)?;
                self.accept_or_stay(model, z, rng)
            }
            Algorithm::ModifiedEe => self.accept_or_stay(model, self.y, rng),
        }
    }

    fn accept_or_stay<M, R>(&self, model: &M, z: S, rng: &mut R) -> Result<S>
    where
        M: Model<State = S>,
        R: Rng + ?Sized,
    {
        let alpha = acceptance_ratio(model.weight(self.x), model.weight(z))?;
        let u: f64 = rng.random();
        Ok(if u < alpha { z } else { self.x })
    }

    fn advance<M: Model<State = S>>(&mut self, model: &M, x_next: S, rng: &mut ChainRng) -> Result<()> {
        let y_next = model.aux_step(self.y, &mut rng.aux);
        match self.algorithm {
            Algorithm::Irmcmc => self.reservoir.push(y_next, model.weight(y_next))?,
            Algorithm::Ee => self.reservoir.push(y_next, 1.0)?,
            Algorithm::ModifiedEe => {}
        }
        self.x = x_next;
        self.y = y_next;
        self.n += 1;
        Ok(())
    }

    /// One step of whichever algorithm this chain runs.
    pub fn step<M: Model<State = S>>(&mut self, model: &M, rng: &mut ChainRng) -> Result<()> {
        let x_next = self.propose_main(model, &mut rng.main)?;
        self.advance(model, x_next, rng)
    }
}

/// IRMCMC: with probability `1 - ε` move by `P`, otherwise draw afresh from
/// the weighted empirical measure of the auxiliary samples.
pub fn irmcmc_step<M: Model>(state: &mut ChainState<M::State>, model: &M, rng: &mut ChainRng) -> Result<()> {
    state.expect(Algorithm::Irmcmc)?;
    state.step(model, rng)
}

/// Simplified equi-energy step: with probability `ε` propose a uniformly chosen
/// past auxiliary sample `z` and accept it with probability `1 ∧ w(z)/w(x)`.
pub fn ee_step<M: Model>(state: &mut ChainState<M::State>, model: &M, rng: &mut ChainRng) -> Result<()> {
    state.expect(Algorithm::Ee)?;
    state.step(model, rng)
}

/// Equi-energy step whose proposal is the current auxiliary state `Y_n`.
pub fn modified_ee_step<M: Model>(
    state: &mut ChainState<M::State>,
    model: &M,
    rng: &mut ChainRng,
) -> Result<()> {
    state.expect(Algorithm::ModifiedEe)?;
    state.step(model, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig<S> {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub x0: S,
    pub y0: S,
    pub record_aux: bool,
}

/// Main-chain path `X_1..X_n` and, optionally, the auxiliary path `Y_1..Y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    pub x: Vec<S>,
    pub y: Option<Vec<S>>,
}

/// A chain bound to its model and random streams.
pub struct Chain<'m, M: Model> {
    model: &'m M,
    state: ChainState<M::State>,
    rng: ChainRng,
}

impl<'m, M: Model> Chain<'m, M> {
    pub fn new(model: &'m M, config: &ChainConfig<M::State>, rng: ChainRng) -> Result<Self> {
        let state = ChainState::new(config.algorithm, config.epsilon, config.x0, config.y0)?;
        Ok(Self { model, state, rng })
    }

    pub fn step(&mut self) -> Result<M::State> {
        self.state.step(self.model, &mut self.rng)?;
        Ok(self.state.x())
    }

    pub fn state(&self) -> &ChainState<M::State> {
        &self.state
    }
}

/// Runs `n_steps` steps from the configuration, reproducibly from `seed`.
pub fn run_chain<M: Model>(
    model: &M,
    config: &ChainConfig<M::State>,
    n_steps: usize,
    seed: u64,
) -> Result<Trace<M::State>> {
    run_chain_with(model, config, n_steps, ChainRng::from_seed(seed))
}

pub fn run_chain_with<M: Model>(
    model: &M,
    config: &ChainConfig<M::State>,
    n_steps: usize,
    rng: ChainRng,
) -> Result<Trace<M::State>> {
    if n_steps == 0 {
        return Err(Error::Config("n_steps must be at least 1".into()));
    }
    let mut chain = Chain::new(model, config, rng)?;
    let mut x = Vec::with_capacity(n_steps);
    let mut y = config.record_aux.then(|| Vec::with_capacity(n_steps));
    for _ in 0..n_steps {
        x.push(chain.step()?);
        if let Some(ys) = y.as_mut() {
            ys.push(chain.state().y());
        }
    }
    Ok(Trace { x, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{FiniteDistribution, KernelMatrix};
    use crate::samplers::FiniteModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state(a: f64, b: f64) -> FiniteModel {
        let aux = KernelMatrix::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap();
        let pi = FiniteDistribution::new(vec![b / (a + b), a / (a + b)]).unwrap();
        FiniteModel::new(pi.clone(), pi.clone(), KernelMatrix::constant(&pi), aux).unwrap()
    }

    #[test]
    fn wrong_algorithm_is_a_state_error() {
        let model = two_state(0.3, 0.3);
        let mut s = ChainState::new(Algorithm::Ee, 0.5, 0, 1).unwrap();
        let mut rng = ChainRng::from_seed(1);
        assert!(matches!(
            irmcmc_step(&mut s, &model, &mut rng),
            Err(Error::State(_))
        ));
        assert!(ee_step(&mut s, &model, &mut rng).is_ok());
    }

    #[test]
    fn reservoir_grows_one_entry_per_step() {
        let model = two_state(0.3, 0.2);
        for alg in [Algorithm::Irmcmc, Algorithm::Ee] {
            let mut s = ChainState::new(alg, 0.4, 0, 1).unwrap();
            let mut rng = ChainRng::from_seed(9);
            for k in 1..=50 {
                s.step(&model, &mut rng).unwrap();
                assert_eq!(s.reservoir().len(), k);
                assert_eq!(s.n(), k);
                assert_eq!(s.epsilon(), 0.4);
            }
        }
    }

    #[test]
    fn first_resample_uses_initial_auxiliary_state() {
        let model = two_state(0.3, 0.2);
        let s = ChainState::new(Algorithm::Irmcmc, 1.0, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(s.propose_main(&model, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn modified_ee_with_unit_weights_shadows_auxiliary() {
        let model = two_state(0.4, 0.3);
        let mut s = ChainState::new(Algorithm::ModifiedEe, 1.0, 0, 1).unwrap();
        let mut rng = ChainRng::from_seed(4);
        let mut prev_y = s.y();
        for _ in 0..200 {
            modified_ee_step(&mut s, &model, &mut rng).unwrap();
            assert_eq!(s.x(), prev_y);
            prev_y = s.y();
        }
    }

    #[test]
    fn epsilon_outside_unit_interval_rejected() {
        assert!(ChainState::new(Algorithm::Irmcmc, 1.5, 0usize, 0).is_err());
        assert!(ChainState::new(Algorithm::Irmcmc, -0.1, 0usize, 0).is_err());
    }

    #[test]
    fn run_chain_is_deterministic_and_sized() {
        let model = two_state(0.3, 0.2);
        let cfg = ChainConfig {
            algorithm: Algorithm::Ee,
            epsilon: 0.3,
            x0: 0,
            y0: 1,
            record_aux: true,
        };
        let a = run_chain(&model, &cfg, 500, 77).unwrap();
        let b = run_chain(&model, &cfg, 500, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x.len(), 500);
        assert_eq!(a.y.as_ref().unwrap().len(), 500);
        assert_eq!(run_chain(&model, &cfg, 1, 77).unwrap().x.len(), 1);
        assert!(matches!(run_chain(&model, &cfg, 0, 77), Err(Error::Config(_))));
    }
}
