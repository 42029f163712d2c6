//! Gradient-tracking distributed optimization.
//!
//! Agents on an undirected graph each hold a private objective f_i and
//! cooperate to minimize f = (1/n) Σ f_i by exchanging iterates with their
//! neighbours through a doubly stochastic weight matrix. The crate provides
//! graph generators, weight builders, three objective families with exact
//! minimizer oracles, gradient tracking and its baselines, and evaluators for
//! the convergence-rate and error bounds of gradient tracking.

pub mod algorithms;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod matrix;
pub mod objectives;
pub mod rng;
pub mod theory;
pub mod weights;

pub use error::{Error, Result};
pub use algorithms::{Algorithm, StepSchedule, TrackingState, Trajectory};
pub use experiment::ExperimentConfig;
pub use graph::Graph;
pub use matrix::AgentMatrix;
pub use objectives::ObjectiveSuite;
pub use theory::{ConvergenceMatrix, StepRule, ZVector};
pub use weights::WeightMatrix;
