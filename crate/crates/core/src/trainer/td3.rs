use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::replay::{ReplayBuffer, Transition};
use super::{curve_point, EnvFactory, LearningCurve, CURVE_SEED_BASE};
use crate::error::{Error, Result};
use crate::neural::{Adam, GradientBundle, Head, Mlp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// std of Gaussian exploration noise on actions
    pub expl_noise: f64,
    pub target_noise: f64,
    pub target_clip: f64,
    pub policy_delay: usize,
    pub tau: f64,
    pub gamma: f64,
    /// steps of uniform random actions before learning starts
    pub warmup: usize,
    pub total_steps: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// multiplies rewards before they reach the critics
    pub reward_scale: f64,
    /// scale applied to the initial output-layer weights of the actor
    pub final_layer_scale: f64,
    pub seed: u64,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            actor_hidden: vec![50, 50],
            critic_hidden: vec![50, 50],
            lr: 3e-4,
            batch_size: 512,
            buffer_capacity: 10_000,
            expl_noise: 0.1,
            target_noise: 0.2,
            target_clip: 0.5,
            policy_delay: 2,
            tau: 0.005,
            gamma: 0.99,
            warmup: 1000,
            total_steps: 4200,
            eval_every: 700,
            eval_episodes: 5,
            reward_scale: 0.01,
            final_layer_scale: 0.01,
            seed: 0,
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("td3: {m}")));
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return bad("batch size must be in 1..=buffer capacity");
        }
        if self.policy_delay == 0 {
            return bad("policy delay must be >= 1");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.lr > 0.0 && self.expl_noise >= 0.0 && self.target_noise >= 0.0 && self.target_clip >= 0.0) {
            return bad("learning rate must be positive and noise scales non-negative");
        }
        if self.eval_every == 0 || self.eval_episodes == 0 || self.total_steps == 0 {
            return bad("total steps, eval interval and eval episodes must be positive");
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }
}

fn arch(n_in: usize, hidden: &[usize], n_out: usize) -> Vec<usize> {
    std::iter::once(n_in).chain(hidden.iter().copied()).chain([n_out]).collect()
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().chain(b).copied().collect()
}

/// Batch gradients are summed in fixed chunks, then across chunks in
/// order, so results do not depend on the thread count.
const CHUNK: usize = 32;

fn apply(net: &mut Mlp, opt: &mut Adam, grads: &GradientBundle) {
    let mut flat = net.to_flat();
    opt.update(&mut flat, &grads.to_flat());
    net.set_flat(&flat).expect("same shape");
}

fn sum_chunks(net: &Mlp, parts: Vec<GradientBundle>) -> GradientBundle {
    let mut total = GradientBundle::zeros_like(net);
    for p in &parts {
        total.accumulate(p);
    }
    total
}

/// Outcome of one learning update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateInfo {
    pub critic_loss: f64,
    pub actor_updated: bool,
}

/// Actor, twin critics, their targets and optimizers.
#[derive(Debug, Clone)]
pub struct Td3Agent {
    pub cfg: Td3Config,
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critics: [Mlp; 2],
    pub critic_targets: [Mlp; 2],
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    obs_dim: usize,
    act_dim: usize,
    updates: u64,
}

impl Td3Agent {
    pub fn new<R: Rng + ?Sized>(cfg: Td3Config, obs_dim: usize, act_dim: usize, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let mut actor = Mlp::new(&arch(obs_dim, &cfg.actor_hidden, act_dim), Head::Tanh, rng)?;
        actor.scale_output_layer(cfg.final_layer_scale);
        let carch = arch(obs_dim + act_dim, &cfg.critic_hidden, 1);
        let critics = [Mlp::new(&carch, Head::Identity, rng)?, Mlp::new(&carch, Head::Identity, rng)?];
        let actor_opt = Adam::new(actor.n_params(), cfg.lr);
        let critic_opts = [Adam::new(critics[0].n_params(), cfg.lr), Adam::new(critics[1].n_params(), cfg.lr)];
        Ok(Self {
            actor_target: actor.clone(),
            critic_targets: critics.clone(),
            actor,
            critics,
            actor_opt,
            critic_opts,
            obs_dim,
            act_dim,
            updates: 0,
            cfg,
        })
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Deterministic action plus optional Gaussian noise, clipped to [-1, 1].
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], noise: f64, rng: &mut R) -> Result<Vec<f64>> {
        let mut a = self.actor.forward(obs)?;
        if noise > 0.0 {
            let n = Normal::new(0.0, noise).expect("positive std");
            a.iter_mut().for_each(|v| *v = (*v + n.sample(rng)).clamp(-1.0, 1.0));
        }
        Ok(a)
    }

    /// Bootstrapped critic targets `r + gamma (1 - done) min_j Q'_j(s', a')`
    /// with smoothed target actions `a'`.
    pub fn critic_targets<R: Rng + ?Sized>(&self, batch: &[&Transition], rng: &mut R) -> Result<Vec<f64>> {
        let cfg = &self.cfg;
        let noise: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| {
                (0..self.act_dim)
                    .map(|_| {
                        if cfg.target_noise > 0.0 {
                            let n = Normal::new(0.0, cfg.target_noise).expect("positive std");
                            n.sample(rng).clamp(-cfg.target_clip, cfg.target_clip)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        batch
            .par_iter()
            .zip(noise.par_iter())
            .map(|(t, eps)| {
                if t.done {
                    return Ok(cfg.reward_scale * t.r);
                }
                let mut a2 = self.actor_target.forward(&t.s_next)?;
                a2.iter_mut().zip(eps).for_each(|(a, e)| *a = (*a + e).clamp(-1.0, 1.0));
                let input = concat(&t.s_next, &a2);
                let q1 = self.critic_targets[0].forward(&input)?[0];
                let q2 = self.critic_targets[1].forward(&input)?[0];
                Ok(cfg.reward_scale * t.r + cfg.gamma * q1.min(q2))
            })
            .collect()
    }

    fn critic_step(&mut self, j: usize, batch: &[&Transition], targets: &[f64]) -> Result<f64> {
        let net = &self.critics[j];
        let scale = 2.0 / batch.len() as f64;
        let parts: Vec<(GradientBundle, f64)> = batch
            .par_chunks(CHUNK)
            .zip(targets.par_chunks(CHUNK))
            .map(|(ts, ys)| {
                let mut g = GradientBundle::zeros_like(net);
                let mut loss = 0.0;
                for (t, y) in ts.iter().zip(ys) {
                    let cache = net.forward_cached(&concat(&t.s, &t.a))?;
                    let diff = cache.output()[0] - y;
                    loss += diff * diff;
                    let (gi, _) = net.backward(&cache, &[scale * diff])?;
                    g.accumulate(&gi);
                }
                Ok((g, loss))
            })
            .collect::<Result<_>>()?;
        let loss = parts.iter().map(|p| p.1).sum::<f64>() / batch.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Diverged(format!(
                "critic {} loss is {loss} after {} updates",
                j + 1,
                self.updates
            )));
        }
        let grads = sum_chunks(net, parts.into_iter().map(|p| p.0).collect());
        apply(&mut self.critics[j], &mut self.critic_opts[j], &grads);
        Ok(loss)
    }

    fn actor_step(&mut self, batch: &[&Transition]) -> Result<()> {
        let (actor, critic) = (&self.actor, &self.critics[0]);
        let scale = -1.0 / batch.len() as f64;
        let obs_dim = self.obs_dim;
        let parts: Vec<GradientBundle> = batch
            .par_chunks(CHUNK)
            .map(|ts| {
                let mut g = GradientBundle::zeros_like(actor);
                for t in ts {
                    let ac = actor.forward_cached(&t.s)?;
                    let qc = critic.forward_cached(&concat(&t.s, ac.output()))?;
                    let (_, d_in) = critic.backward(&qc, &[1.0])?;
                    let up: Vec<f64> = d_in[obs_dim..].iter().map(|d| scale * d).collect();
                    let (gi, _) = actor.backward(&ac, &up)?;
                    g.accumulate(&gi);
                }
                Ok(g)
            })
            .collect::<Result<_>>()?;
        let grads = sum_chunks(actor, parts);
        apply(&mut self.actor, &mut self.actor_opt, &grads);
        Ok(())
    }

    /// One critic update on a sampled batch; the actor and all targets
    /// follow every `policy_delay` updates.
    pub fn update<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<UpdateInfo> {
        let idx = buffer.sample_indices(rng, self.cfg.batch_size);
        let batch: Vec<&Transition> = idx.iter().map(|i| buffer.get(*i)).collect();
        let targets = self.critic_targets(&batch, rng)?;
        let l1 = self.critic_step(0, &batch, &targets)?;
        let l2 = self.critic_step(1, &batch, &targets)?;
        self.updates += 1;
        let actor_updated = self.updates.is_multiple_of(self.cfg.policy_delay as u64);
        if actor_updated {
            self.actor_step(&batch)?;
            let tau = self.cfg.tau;
            self.actor_target.soft_update(&self.actor, tau);
            for j in 0..2 {
                self.critic_targets[j].soft_update(&self.critics[j], tau);
            }
        }
        Ok(UpdateInfo {
            critic_loss: 0.5 * (l1 + l2),
            actor_updated,
        })
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct Td3Outcome {
    pub policy: Mlp,
    pub curve: LearningCurve,
    pub episodes: usize,
    pub env_steps: u64,
}

/// Standard TD3 loop: uniform random actions during warmup, then noisy
/// policy actions with one update per environment step. Evaluation points
/// are logged every `eval_every` steps and at the end.
pub fn td3_train(factory: &EnvFactory, cfg: &Td3Config) -> Result<Td3Outcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut env = factory();
    let (obs_dim, act_dim) = (env.obs_dim(), env.act_dim());
    let mut agent = Td3Agent::new(cfg.clone(), obs_dim, act_dim, &mut rng)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut curve = LearningCurve::default();
    let bootstrap_truncated = env.bootstrap_on_truncation();

    let mut steps = 0u64;
    let mut episodes = 0usize;
    let mut obs = env.reset(rng.gen_range(0..CURVE_SEED_BASE))?;
    while steps < cfg.total_steps as u64 {
        let a = if (steps as usize) < cfg.warmup {
            (0..act_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        } else {
            agent.act(&obs, cfg.expl_noise, &mut rng)?
        };
        let out = env.step(&a)?;
        steps += 1;
        buffer.push(Transition {
            s: obs,
            a,
            r: out.reward,
            s_next: out.obs.clone(),
            done: out.terminated || (out.truncated && !bootstrap_truncated),
        });
        obs = if out.done() {
            episodes += 1;
            env.reset(rng.gen_range(0..CURVE_SEED_BASE))?
        } else {
            out.obs
        };
        if steps as usize >= cfg.warmup {
            agent.update(&buffer, &mut rng)?;
        }
        if steps.is_multiple_of(cfg.eval_every as u64) || steps == cfg.total_steps as u64 {
            curve.push(curve_point(factory, &agent.actor, cfg.eval_episodes, steps)?)?;
        }
    }
    Ok(Td3Outcome {
        policy: agent.actor,
        curve,
        episodes,
        env_steps: steps,
    })
}
