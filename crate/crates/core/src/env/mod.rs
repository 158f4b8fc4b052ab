//! Episodic environments over the reactor: the recipe environment (one
//! recipe parameter per action) and the direct-control reference (one
//! physical input vector per 30 s interval), plus a one-step bandit used to
//! sanity-check trainers.

mod bandit;
mod direct;
mod observation;
mod recipe_env;
mod reward;

use serde::{Deserialize, Serialize};

pub use bandit::BanditEnv;
pub use direct::DirectEnv;
pub use observation::{encode_direct, ObservationScales, RecipeObservation, DIRECT_DIM};
pub use recipe_env::{phase_reward, RecipeEnv};
pub use reward::{classical_reward, RewardConfig, Scenario, ViolationPenalty};

use crate::error::{Error, Result};
use crate::reactor::{PlantConfig, TrajectoryRow};
use crate::recipe::RecipeSettings;

/// Result of one agent step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// One stored transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub terminated: bool,
    pub truncated: bool,
}

/// Running totals of the current episode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub seed: u64,
    pub steps: usize,
    pub undiscounted_return: f64,
    pub batch_time_s: f64,
    /// simulated 30 s intervals
    pub n_intervals: usize,
    /// violated (interval, constraint) pairs
    pub n_cv: usize,
    pub terminated: bool,
    pub truncated: bool,
}

impl EpisodeStats {
    /// Violations as percent of visited intervals.
    pub fn n_cv_rel(&self) -> f64 {
        if self.n_intervals == 0 {
            0.0
        } else {
            100.0 * self.n_cv as f64 / self.n_intervals as f64
        }
    }
}

/// Uniform episodic interface. Actions are in [-1, 1]^act_dim; values
/// outside are clamped.
pub trait Env: Send {
    fn obs_dim(&self) -> usize;
    fn act_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, action: &[f64]) -> Result<StepOutcome>;
    fn stats(&self) -> EpisodeStats;
    /// Whether a truncated episode's last observation should be bootstrapped
    /// by value-based learners. False where truncation also ends the
    /// decision sequence.
    fn bootstrap_on_truncation(&self) -> bool {
        true
    }
    /// Plant trajectory of the current episode, one row per interval.
    fn trajectory(&self) -> Vec<TrajectoryRow> {
        Vec::new()
    }
}

fn check_action(action: &[f64], dim: usize) -> Result<()> {
    if action.len() != dim {
        return Err(Error::Shape(format!("action has {} entries, expected {dim}", action.len())));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(Error::Contract("action is not finite".into()));
    }
    Ok(())
}

fn finished() -> Error {
    Error::Contract("step called after the episode ended".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Recipe,
    Direct,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Recipe => "recipe",
            EnvKind::Direct => "direct",
        }
    }
}

/// Everything needed to build identical environment instances.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub plant: PlantConfig,
    pub recipe: RecipeSettings,
    pub reward: RewardConfig,
    pub scales: ObservationScales,
}

impl EnvSpec {
    pub fn new(kind: EnvKind, plant: PlantConfig, recipe: RecipeSettings, reward: RewardConfig) -> Self {
        Self {
            kind,
            plant,
            recipe,
            reward,
            scales: ObservationScales::default(),
        }
    }

    pub fn build(&self) -> Box<dyn Env> {
        match self.kind {
            EnvKind::Recipe => Box::new(RecipeEnv::new(
                self.plant.clone(),
                self.recipe.clone(),
                self.reward,
                self.scales,
            )),
            EnvKind::Direct => Box::new(DirectEnv::new(
                self.plant.clone(),
                self.recipe.clone(),
                self.reward,
                self.scales,
            )),
        }
    }
}

/// Runs one episode with `policy`, optionally keeping every transition.
pub fn rollout<P>(env: &mut dyn Env, seed: u64, mut policy: P, record: bool) -> Result<(EpisodeStats, Vec<TransitionRecord>)>
where
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut s = env.reset(seed)?;
    let mut log = Vec::new();
    loop {
        let a = policy(&s)?;
        let out = env.step(&a)?;
        let done = out.done();
        if record {
            log.push(TransitionRecord {
                s: std::mem::take(&mut s),
                a,
                r: out.reward,
                s_next: out.obs.clone(),
                terminated: out.terminated,
                truncated: out.truncated,
            });
        }
        s = out.obs;
        if done {
            return Ok((env.stats(), log));
        }
    }
}
