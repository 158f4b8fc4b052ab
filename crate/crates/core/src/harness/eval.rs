use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::write_json;
use crate::env::{rollout, EnvSpec, RecipeObservation, TransitionRecord};
use crate::error::{Error, Result};
use crate::neural::Mlp;
use crate::reactor::write_trajectory_csv;
use crate::recipe::{RecipeSettings, N_PARAMS};
use crate::trainer::mean_std;

/// Evaluation episodes use seeds `base + 1 ..= base + n`; training never
/// draws seeds this large.
pub const EVAL_SEED_BASE: u64 = 1_000_000;

/// Maps an observation to an action in [-1, 1]^act_dim.
pub trait Policy: Sync {
    fn act(&self, obs: &[f64]) -> Result<Vec<f64>>;
}

impl Policy for Mlp {
    fn act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.forward(obs)
    }
}

/// The fixed expert recipe, played step by step in the recipe environment.
#[derive(Debug, Clone)]
pub struct BaselinePolicy {
    actions: [f64; N_PARAMS],
}

impl BaselinePolicy {
    pub fn new(settings: &RecipeSettings) -> Self {
        Self {
            actions: std::array::from_fn(|i| settings.boxes[i].normalize(settings.baseline[i])),
        }
    }
}

impl Policy for BaselinePolicy {
    fn act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let c = RecipeObservation::decode_step(obs)?;
        self.actions
            .get(c - 1)
            .map(|a| vec![*a])
            .ok_or_else(|| Error::Contract(format!("no baseline action for step {c}")))
    }
}

/// Summary of one evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub scenario: String,
    #[serde(rename = "return")]
    pub undiscounted_return: f64,
    pub batch_time_s: f64,
    pub n_cv: usize,
    pub n_cv_rel: f64,
    pub n_intervals: usize,
    pub terminated: bool,
    pub truncated: bool,
}

/// Aggregates over evaluation episodes; spreads are sample deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub n_episodes: usize,
    pub mean_t_batch_h: f64,
    pub std_t_batch_h: f64,
    pub mean_ncv: f64,
    pub std_ncv: f64,
    /// percent of visited intervals
    pub mean_ncv_rel: f64,
    pub std_ncv_rel: f64,
    pub completion_rate: f64,
    pub mean_return: f64,
    pub std_return: f64,
}

impl EvalMetrics {
    pub fn from_records(records: &[EpisodeRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Contract("no episodes to aggregate".into()));
        }
        let col = |f: fn(&EpisodeRecord) -> f64| mean_std(&records.iter().map(f).collect::<Vec<_>>());
        let (mean_t_batch_h, std_t_batch_h) = col(|r| r.batch_time_s / 3600.0);
        let (mean_ncv, std_ncv) = col(|r| r.n_cv as f64);
        let (mean_ncv_rel, std_ncv_rel) = col(|r| r.n_cv_rel);
        let (mean_return, std_return) = col(|r| r.undiscounted_return);
        let done = records.iter().filter(|r| r.terminated).count();
        Ok(Self {
            n_episodes: records.len(),
            mean_t_batch_h,
            std_t_batch_h,
            mean_ncv,
            std_ncv,
            mean_ncv_rel,
            std_ncv_rel,
            completion_rate: done as f64 / records.len() as f64,
            mean_return,
            std_return,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metrics: EvalMetrics,
    pub episodes: Vec<EpisodeRecord>,
}

fn write_transitions(path: &Path, log: &[TransitionRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    let (ns, na) = log.first().map_or((0, 0), |t| (t.s.len(), t.a.len()));
    let mut header = vec!["step".to_string()];
    header.extend((0..ns).map(|i| format!("s_{i}")));
    header.extend((0..na).map(|i| format!("a_{i}")));
    header.push("r".into());
    header.extend((0..ns).map(|i| format!("s_next_{i}")));
    header.extend(["terminated".to_string(), "truncated".to_string()]);
    w.write_record(&header).map_err(to_err)?;
    for (k, t) in log.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(t.s.iter().chain(&t.a).map(|v| format!("{v:?}")));
        rec.push(format!("{:?}", t.r));
        rec.extend(t.s_next.iter().map(|v| format!("{v:?}")));
        rec.extend([t.terminated.to_string(), t.truncated.to_string()]);
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs `n` noise-free episodes on seeds `base_seed + 1 ..= base_seed + n`.
/// With `out`, writes per-episode trajectory and transition CSVs, episode
/// summaries and `metrics.json`.
pub fn evaluate(
    spec: &EnvSpec,
    policy: &dyn Policy,
    n: usize,
    base_seed: u64,
    out: Option<&Path>,
) -> Result<EvalReport> {
    if n == 0 {
        return Err(Error::Config("at least one evaluation episode is required".into()));
    }
    let dir = out.map(|d| d.join("episodes"));
    if let Some(d) = &dir {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let scenario = spec.reward.scenario.name().to_string();
    let episodes: Vec<EpisodeRecord> = (1..=n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed + i;
            let mut env = spec.build();
            let (stats, log) = rollout(env.as_mut(), seed, |o| policy.act(o), dir.is_some())?;
            let record = EpisodeRecord {
                seed,
                scenario: scenario.clone(),
                undiscounted_return: stats.undiscounted_return,
                batch_time_s: stats.batch_time_s,
                n_cv: stats.n_cv,
                n_cv_rel: stats.n_cv_rel(),
                n_intervals: stats.n_intervals,
                terminated: stats.terminated,
                truncated: stats.truncated,
            };
            if let Some(d) = &dir {
                let path = d.join(format!("{seed}_trajectory.csv"));
                let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                write_trajectory_csv(f, &env.trajectory())?;
                write_transitions(&d.join(format!("{seed}_transitions.csv")), &log)?;
                write_json(&d.join(format!("{seed}_summary.json")), &record)?;
            }
            Ok(record)
        })
        .collect::<Result<_>>()?;
    let metrics = EvalMetrics::from_records(&episodes)?;
    if let Some(d) = out {
        write_json(&d.join("metrics.json"), &metrics)?;
    }
    Ok(EvalReport { metrics, episodes })
}
