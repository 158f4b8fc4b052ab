use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::observation::{ObservationScales, RecipeObservation};
use super::reward::{classical_reward, RewardConfig};
use super::{check_action, finished, Env, EpisodeStats, StepOutcome};
use crate::error::Result;
use crate::reactor::{sample_initial_state, ControlInput, ModelParameters, PlantConfig, TrajectoryRow};
use crate::recipe::{
    apply_set_step, is_phase_final, phase_of, run_phase, BatchCursor, PhaseTrace, RecipeParameters,
    RecipeSettings, N_PARAMS, N_PHASES,
};

/// `sum_i r_cl,i * dt` over the intervals of one phase. `carried` is the
/// last input applied before the phase; the very first interval of a batch
/// is compared with itself.
pub fn phase_reward(
    trace: &PhaseTrace,
    carried: Option<ControlInput>,
    cfg: &RewardConfig,
    model: &ModelParameters,
) -> f64 {
    let mut prev = carried;
    let mut total = 0.0;
    for (i, u) in trace.inputs.iter().enumerate() {
        let u_prev = prev.unwrap_or(*u);
        let r = classical_reward(
            &trace.states[i],
            u,
            &u_prev,
            &trace.states[i + 1],
            trace.dt,
            Some(trace.reactor_setpoint),
            cfg,
            model,
        );
        total += r * trace.dt;
        prev = Some(*u);
    }
    total
}

#[derive(Debug, Clone)]
struct Episode {
    theta: RecipeParameters,
    cursor: BatchCursor,
    phases: Vec<PhaseTrace>,
    stats: EpisodeStats,
}

/// The agent assigns one recipe parameter per step. Steps that close a
/// phase simulate it and return its accumulated reward; all others return
/// zero and leave the plant untouched.
#[derive(Debug, Clone)]
pub struct RecipeEnv {
    plant: PlantConfig,
    settings: RecipeSettings,
    reward: RewardConfig,
    scales: ObservationScales,
    episode: Option<Episode>,
}

impl RecipeEnv {
    pub fn new(plant: PlantConfig, settings: RecipeSettings, reward: RewardConfig, scales: ObservationScales) -> Self {
        Self {
            plant,
            settings,
            reward,
            scales,
            episode: None,
        }
    }

    pub fn settings(&self) -> &RecipeSettings {
        &self.settings
    }

    pub fn scales(&self) -> &ObservationScales {
        &self.scales
    }

    /// Current observation in structured form.
    pub fn observation(&self) -> Option<RecipeObservation> {
        self.episode.as_ref().map(|e| RecipeObservation {
            x: e.cursor.x,
            theta: e.theta,
            c: e.theta.next_step(),
            t: e.cursor.clock,
        })
    }

    pub fn phases(&self) -> &[PhaseTrace] {
        self.episode.as_ref().map_or(&[], |e| &e.phases)
    }

    /// Normalized action that reproduces `value` for parameter `c`.
    pub fn action_for(&self, c: usize, value: f64) -> f64 {
        self.settings.boxes[c - 1].normalize(value)
    }

    fn encode(&self) -> Vec<f64> {
        self.observation()
            .expect("episode active")
            .encode(&self.scales, &self.settings.boxes)
    }
}

impl Env for RecipeEnv {
    fn obs_dim(&self) -> usize {
        RecipeObservation::DIM
    }

    fn act_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = sample_initial_state(&mut rng, &self.plant.initial, &self.plant.model);
        self.episode = Some(Episode {
            theta: RecipeParameters::unset(),
            cursor: BatchCursor::start(x0),
            phases: Vec::with_capacity(N_PHASES),
            stats: EpisodeStats {
                seed,
                ..EpisodeStats::default()
            },
        });
        Ok(self.encode())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        check_action(action, 1)?;
        let ep = self.episode.as_mut().ok_or_else(finished)?;
        if ep.stats.terminated || ep.stats.truncated || ep.theta.is_complete() {
            return Err(finished());
        }
        let c = ep.theta.next_step();
        let value = self.settings.boxes[c - 1].denormalize(action[0]);
        ep.theta = apply_set_step(&ep.theta, &self.settings.boxes, c, value)?;
        ep.stats.steps += 1;

        let mut reward = 0.0;
        if is_phase_final(c) {
            let z = phase_of(c);
            let carried = ep.cursor.last_input;
            let (trace, next) = run_phase(&self.plant.model, &self.settings, &ep.cursor, &ep.theta, z)?;
            reward = phase_reward(&trace, carried, &self.reward, &self.plant.model);
            ep.stats.n_intervals += trace.n_end();
            ep.stats.n_cv += trace.violations.iter().sum::<usize>();
            if c == N_PARAMS {
                ep.stats.terminated = trace.converged;
                ep.stats.truncated = trace.truncated;
            }
            ep.cursor = next;
            ep.phases.push(trace);
        }
        ep.stats.undiscounted_return += reward;
        ep.stats.batch_time_s = ep.cursor.clock;
        let (terminated, truncated) = (ep.stats.terminated, ep.stats.truncated);
        Ok(StepOutcome {
            obs: self.encode(),
            reward,
            terminated,
            truncated,
        })
    }

    fn stats(&self) -> EpisodeStats {
        self.episode.as_ref().map(|e| e.stats).unwrap_or_default()
    }

    fn bootstrap_on_truncation(&self) -> bool {
        false
    }

    fn trajectory(&self) -> Vec<TrajectoryRow> {
        self.phases().iter().flat_map(PhaseTrace::rows).collect()
    }
}
