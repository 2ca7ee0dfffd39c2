//! Adaptive samplers over a generic [`Model`].

mod chain;
mod ladder;
mod model;
mod rng;

pub use chain::{
    ee_step, irmcmc_step, modified_ee_step, run_chain, run_chain_with, Algorithm, Chain, ChainConfig,
    ChainState, Trace,
};
pub use ladder::{Ladder, LadderSpec};
pub use model::{
    BaseMove, Component, FiniteModel, FiniteModelParts, MixtureDemo, Model, INVARIANCE_TOLERANCE,
};
pub use rng::{seeded_stream, ChainRng};
