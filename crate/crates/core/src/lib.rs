//! Simulation laboratory for the global-coin multiplicative weights update
//! (MWU) algorithm played against greedy corrupting adversaries.
//!
//! The crate is organised bottom-up:
//!
//! - [`mwu`]: the coin-flipping MWU engine (advice, weighted output, gains,
//!   multiplicative update) and the episode loop.
//! - [`solver`]: the capped subset-sum problem every adversary solves, with an
//!   exhaustive reference solver and a resolution-bounded dynamic program.
//! - [`nonadaptive`]: the greedy adversary that owns a fixed set of experts.
//! - [`adaptive`]: the greedy adversary that captures experts as the rounds go
//!   and may additionally set the advice of up to `floor(sqrt(n))` good experts
//!   for a single round.
//! - [`game`]: a generic MWU-versus-adversary game with a pluggable termination
//!   formula; the global coin is its only shipped instance.
//! - [`harness`]: seeded multi-trial experiments, CSV and SVG output.

pub mod adaptive;
pub mod error;
pub mod game;
pub mod harness;
pub mod mwu;
pub mod nonadaptive;
pub mod solver;

pub use adaptive::{AdaptiveAdversary, AdaptiveState, SearchOutcome, SearchResult};
pub use error::{Error, Result};
pub use harness::{
    run_sweep, run_trajectory, run_trial, AdversaryKind, EtaSetting, SimConfig, SweepRow,
    TrajectoryRow, TrialRecord,
};
pub use mwu::episode::{
    run_episode, Adversary, AdversaryAction, AdversaryPolicy, EpisodeResult, HiddenPolicy,
    NoAdversary, RoundRecord,
};
pub use mwu::{
    compute_gains, default_eta, mwu_output, run_round, sgn, update_weights, AdviceVector,
    Direction, GainVector, MwuParams, RoundOutcome, WeightVector,
};
pub use nonadaptive::{CapResult, NonAdaptiveAdversary, RoundPlan};
pub use solver::{SolverBackend, SolverConfig, SolverInstance, SolverSolution};
