use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::observation::{encode_direct, ObservationScales, DIRECT_DIM};
use super::reward::{classical_reward, RewardConfig};
use super::{check_action, finished, Env, EpisodeStats, StepOutcome};
use crate::error::Result;
use crate::reactor::{
    advance, check_constraints, conversion, sample_initial_state, ControlInput, PhysicalState,
    PlantConfig, TrajectoryRow, N_INPUTS,
};
use crate::recipe::{limit_to_remaining, BatchSettings, RecipeSettings};

#[derive(Debug, Clone)]
struct Episode {
    x: PhysicalState,
    clock: f64,
    u_prev: Option<ControlInput>,
    rows: Vec<TrajectoryRow>,
    stats: EpisodeStats,
}

/// Reference environment where the agent sets all three physical inputs
/// every control interval. The feed is limited to what remains of the
/// batch feed mass; the episode ends on conversion or at truncation.
#[derive(Debug, Clone)]
pub struct DirectEnv {
    plant: PlantConfig,
    batch: BatchSettings,
    reward: RewardConfig,
    scales: ObservationScales,
    /// shown as the previous input before the first step
    neutral: ControlInput,
    episode: Option<Episode>,
}

impl DirectEnv {
    pub fn new(plant: PlantConfig, settings: RecipeSettings, reward: RewardConfig, scales: ObservationScales) -> Self {
        let outer = &settings.cascade.outer;
        let neutral = ControlInput::saturated(
            0.0,
            outer.jacket_map.u_ss,
            outer.ehe_map.u_ss,
            &plant.model.actuators,
        );
        Self {
            plant,
            batch: settings.batch,
            reward,
            scales,
            neutral,
            episode: None,
        }
    }

    /// Normalized action that reproduces input `u`.
    pub fn action_for(&self, u: &ControlInput) -> [f64; N_INPUTS] {
        let a = &self.plant.model.actuators;
        let boxes = [a.feed, a.jacket_inlet, a.ehe_inlet];
        let v = u.to_array();
        std::array::from_fn(|i| boxes[i].normalize(v[i]))
    }

    fn encode(&self, ep: &Episode) -> Vec<f64> {
        encode_direct(
            &ep.x,
            &ep.u_prev.unwrap_or(self.neutral),
            ep.clock,
            &self.scales,
            &self.plant.model.actuators,
        )
    }
}

impl Env for DirectEnv {
    fn obs_dim(&self) -> usize {
        DIRECT_DIM
    }

    fn act_dim(&self) -> usize {
        N_INPUTS
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sample_initial_state(&mut rng, &self.plant.initial, &self.plant.model);
        let ep = Episode {
            x,
            clock: 0.0,
            u_prev: None,
            rows: Vec::new(),
            stats: EpisodeStats {
                seed,
                ..EpisodeStats::default()
            },
        };
        let obs = self.encode(&ep);
        self.episode = Some(ep);
        Ok(obs)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        check_action(action, N_INPUTS)?;
        let model = &self.plant.model;
        let batch = &self.batch;
        let mut ep = self.episode.take().ok_or_else(finished)?;
        if ep.stats.terminated || ep.stats.truncated {
            self.episode = Some(ep);
            return Err(finished());
        }
        let a = &model.actuators;
        let feed = limit_to_remaining(a.feed.denormalize(action[0]), &ep.x, batch);
        let u = ControlInput::saturated(
            feed,
            a.jacket_inlet.denormalize(action[1]),
            a.ehe_inlet.denormalize(action[2]),
            a,
        );
        let dt = batch.control_interval;
        let x_next = match advance(&ep.x, &u, dt, batch.integrator_step, model) {
            Ok(x) => x,
            Err(e) => {
                self.episode = Some(ep);
                return Err(e);
            }
        };
        let setpoint = self.reward.direct_tracking.then_some(self.reward.direct_setpoint);
        let u_prev = ep.u_prev.unwrap_or(u);
        let reward = classical_reward(&ep.x, &u, &u_prev, &x_next, dt, setpoint, &self.reward, model) * dt;
        let n_violations = check_constraints(&x_next, &u, model).count();

        ep.x = x_next;
        ep.clock += dt;
        ep.u_prev = Some(u);
        ep.rows.push(TrajectoryRow {
            t_s: ep.clock,
            state: x_next,
            input: u,
            n_violations,
            recipe: None,
        });
        let delivered = x_next.m_accumulated >= batch.batch_feed_mass - BatchSettings::FEED_TOLERANCE;
        let converged = delivered && conversion(&x_next).is_ok_and(|chi| chi >= batch.conversion_target);
        let st = &mut ep.stats;
        st.steps += 1;
        st.n_intervals += 1;
        st.n_cv += n_violations;
        st.undiscounted_return += reward;
        st.batch_time_s = ep.clock;
        st.terminated = converged;
        st.truncated = !converged && ep.clock >= batch.truncation_time;
        let (terminated, truncated) = (st.terminated, st.truncated);
        let out = StepOutcome {
            obs: self.encode(&ep),
            reward,
            terminated,
            truncated,
        };
        self.episode = Some(ep);
        Ok(out)
    }

    fn stats(&self) -> EpisodeStats {
        self.episode.as_ref().map(|e| e.stats).unwrap_or_default()
    }

    fn trajectory(&self) -> Vec<TrajectoryRow> {
        self.episode.as_ref().map(|e| e.rows.clone()).unwrap_or_default()
    }
}
