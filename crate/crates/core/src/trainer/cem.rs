use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{curve_point, EnvFactory, LearningCurve, CURVE_SEED_BASE};
use crate::error::{Error, Result};
use crate::neural::{Head, Mlp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CemConfig {
    pub hidden: Vec<usize>,
    pub population: usize,
    pub elite_frac: f64,
    /// initial per-parameter sampling std
    pub init_std: f64,
    /// the sampling std never drops below `init_std * decay^generation`
    pub decay: f64,
    pub episodes_per_candidate: usize,
    pub generations: usize,
    pub eval_episodes: usize,
    pub final_layer_scale: f64,
    /// re-evaluate the previous generation's elites alongside new samples
    pub keep_elites: bool,
    pub seed: u64,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            hidden: vec![50, 50],
            population: 10,
            elite_frac: 0.2,
            init_std: 0.05,
            decay: 0.9,
            episodes_per_candidate: 1,
            generations: 25,
            eval_episodes: 2,
            final_layer_scale: 0.01,
            keep_elites: true,
            seed: 0,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("cem: {m}")));
        if self.population < 2 {
            return bad("population must be >= 2");
        }
        if !(self.elite_frac > 0.0 && self.elite_frac < 1.0) {
            return bad("elite fraction must lie in (0, 1)");
        }
        if !(self.init_std > 0.0 && self.decay > 0.0 && self.decay <= 1.0) {
            return bad("init_std must be positive and decay in (0, 1]");
        }
        if self.episodes_per_candidate == 0 || self.generations == 0 || self.eval_episodes == 0 {
            return bad("episode counts and generations must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }

    pub fn n_elite(&self) -> usize {
        ((self.elite_frac * self.population as f64).round() as usize).clamp(1, self.population - 1)
    }

    /// Training episodes consumed by a full run.
    pub fn episode_budget(&self) -> usize {
        self.population * self.episodes_per_candidate * self.generations
    }
}

#[derive(Debug, Clone)]
pub struct CemOutcome {
    /// generation mean with the best learning-curve return
    pub policy: Mlp,
    /// mean after the last generation
    pub final_policy: Mlp,
    pub curve: LearningCurve,
    /// mean training return of each generation's elites
    pub elite_means: Vec<f64>,
    pub episodes: usize,
    pub env_steps: u64,
}

/// Cross-entropy search over the flat parameters of a tanh-headed policy.
/// All candidates of a generation share the same training seeds.
pub fn cem_train(factory: &EnvFactory, cfg: &CemConfig) -> Result<CemOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let env = factory();
    let arch: Vec<usize> = std::iter::once(env.obs_dim())
        .chain(cfg.hidden.iter().copied())
        .chain([env.act_dim()])
        .collect();
    drop(env);
    let mut policy = Mlp::new(&arch, Head::Tanh, &mut rng)?;
    policy.scale_output_layer(cfg.final_layer_scale);
    let n = policy.n_params();
    let mut mean = policy.to_flat();
    let mut std = vec![cfg.init_std; n];
    let n_elite = cfg.n_elite();
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut best: Option<(f64, Mlp)> = None;

    let mut curve = LearningCurve::default();
    let mut elite_means = Vec::with_capacity(cfg.generations);
    let mut steps = 0u64;
    let mut episodes = 0usize;
    for g in 0..cfg.generations {
        let seeds: Vec<u64> = (0..cfg.episodes_per_candidate)
            .map(|_| rng.gen_range(0..CURVE_SEED_BASE))
            .collect();
        let fresh = cfg.population - kept.len();
        let sampled: Vec<Vec<f64>> = (0..fresh)
            .map(|_| {
                mean.iter()
                    .zip(&std)
                    .map(|(m, s)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        m + s * z
                    })
                    .collect()
            })
            .collect();
        let candidates: Vec<Vec<f64>> = std::mem::take(&mut kept).into_iter().chain(sampled).collect();
        let scored: Vec<(f64, u64)> = candidates
            .par_iter()
            .map(|theta| {
                let mut net = policy.clone();
                net.set_flat(theta)?;
                let mut env = factory();
                let mut total = 0.0;
                let mut n_steps = 0;
                for &s in &seeds {
                    let (stats, _) = crate::env::rollout(env.as_mut(), s, |o| net.forward(o), false)?;
                    total += stats.undiscounted_return;
                    n_steps += stats.steps as u64;
                }
                Ok((total / seeds.len() as f64, n_steps))
            })
            .collect::<Result<_>>()?;
        if let Some(i) = scored.iter().position(|(r, _)| !r.is_finite()) {
            return Err(Error::Diverged(format!("candidate {i} of generation {g} returned a non-finite score")));
        }
        steps += scored.iter().map(|s| s.1).sum::<u64>();
        episodes += cfg.population * seeds.len();

        let mut order: Vec<usize> = (0..cfg.population).collect();
        // stable sort: ties keep sampling order
        order.sort_by(|a, b| scored[*b].0.total_cmp(&scored[*a].0));
        let elites = &order[..n_elite];
        elite_means.push(elites.iter().map(|i| scored[*i].0).sum::<f64>() / n_elite as f64);

        let floor = cfg.init_std * cfg.decay.powi(g as i32 + 1);
        for k in 0..n {
            let m = elites.iter().map(|i| candidates[*i][k]).sum::<f64>() / n_elite as f64;
            let var = elites.iter().map(|i| (candidates[*i][k] - m).powi(2)).sum::<f64>() / n_elite as f64;
            mean[k] = m;
            std[k] = var.sqrt() + floor;
        }
        if cfg.keep_elites {
            kept = elites.iter().map(|i| candidates[*i].clone()).collect();
        }
        policy.set_flat(&mean)?;
        let point = curve_point(factory, &policy, cfg.eval_episodes, steps)?;
        if best.as_ref().is_none_or(|(r, _)| point.mean_return > *r) {
            best = Some((point.mean_return, policy.clone()));
        }
        curve.push(point)?;
    }
    Ok(CemOutcome {
        policy: best.expect("at least one generation").1,
        final_policy: policy,
        curve,
        elite_means,
        episodes,
        env_steps: steps,
    })
}
