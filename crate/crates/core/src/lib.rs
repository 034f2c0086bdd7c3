//! Decentralized online convex optimization with coin-betting learners.
//!
//! Agents on a communication graph each see a private stream of absolute
//! losses and cooperate through gossip averaging. The parameter-free
//! learners (DECO-i, DECO-ii) bet a fraction of their wealth along the
//! gossiped sum of negative subgradients; DOGD and a centralized coin-betting
//! oracle are provided as baselines.

pub mod config;
pub mod data;
pub mod error;
pub mod gossip;
pub mod graph;
pub mod learners;
pub mod potentials;
pub mod rng;
pub mod simulator;

pub use error::{Error, ErrorClass, Result};
pub use gossip::{GossipMatrix, GossipSchedule};
pub use graph::Graph;
pub use learners::LearnerKind;
pub use potentials::{PotentialFamily, PotentialKind};
pub use simulator::{run, RunResult, SimConfig};
