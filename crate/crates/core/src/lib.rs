//! Recipe-parameter reinforcement learning for a semi-batch polymerization
//! reactor.
//!
//! An agent chooses the parameters of a fixed three-phase operation recipe
//! (feed ramps, thresholds, cascade PI gains and setpoints) one at a time;
//! each completed phase is simulated through the plant and cascade
//! controller. A direct-control environment, where the agent sets the
//! physical inputs every 30 s, serves as reference.

pub mod bounds;
pub mod control;
pub mod env;
pub mod error;
pub mod harness;
pub mod kv;
pub mod neural;
pub mod reactor;
pub mod recipe;
pub mod trainer;

pub use error::{Error, Result};
