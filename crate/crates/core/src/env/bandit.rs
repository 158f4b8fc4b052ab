use super::{check_action, finished, Env, EpisodeStats, StepOutcome};
use crate::error::Result;

/// One-step bandit with reward `-(a - 0.5)^2`; the optimum is `a = 0.5`.
#[derive(Debug, Clone, Default)]
pub struct BanditEnv {
    stats: EpisodeStats,
    open: bool,
}

impl BanditEnv {
    pub const OPTIMUM: f64 = 0.5;

    pub fn new() -> Self {
        Self::default()
    }
}

impl Env for BanditEnv {
    fn obs_dim(&self) -> usize {
        1
    }

    fn act_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        self.stats = EpisodeStats {
            seed,
            ..EpisodeStats::default()
        };
        self.open = true;
        Ok(vec![1.0])
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        check_action(action, 1)?;
        if !self.open {
            return Err(finished());
        }
        self.open = false;
        let a = action[0].clamp(-1.0, 1.0);
        let reward = -(a - Self::OPTIMUM).powi(2);
        self.stats.steps = 1;
        self.stats.undiscounted_return = reward;
        self.stats.terminated = true;
        Ok(StepOutcome {
            obs: vec![1.0],
            reward,
            terminated: true,
            truncated: false,
        })
    }

    fn stats(&self) -> EpisodeStats {
        self.stats
    }
}
