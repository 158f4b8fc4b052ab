use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{EnvKind, EnvSpec, ObservationScales, RewardConfig};
use crate::error::{Error, Result};
use crate::neural::{Mlp, WeightsFile};
use crate::reactor::PlantConfig;
use crate::recipe::RecipeSettings;
use crate::trainer::{cem_train, td3_train, CemConfig, LearningCurve, Td3Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Td3,
    Cem,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Td3 => "TD3",
            Algorithm::Cem => "CEM",
        }
    }
}

/// Everything a training run needs besides the plant and recipe files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub env: EnvKind,
    pub algorithm: Algorithm,
    pub reward: RewardConfig,
    pub td3: Td3Config,
    pub cem: CemConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::Recipe,
            algorithm: Algorithm::Cem,
            reward: RewardConfig::default(),
            td3: Td3Config::default(),
            cem: CemConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn seed(&self) -> u64 {
        match self.algorithm {
            Algorithm::Td3 => self.td3.seed,
            Algorithm::Cem => self.cem.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.td3.seed = seed;
        self.cem.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.reward.validate()?;
        if self.seed() >= crate::harness::EVAL_SEED_BASE {
            return Err(Error::Config(format!(
                "training seed {} lies in the evaluation seed range (>= {})",
                self.seed(),
                crate::harness::EVAL_SEED_BASE
            )));
        }
        match self.algorithm {
            Algorithm::Td3 => self.td3.validate(),
            Algorithm::Cem => self.cem.validate(),
        }
    }

    pub fn env_spec(&self, plant: &PlantConfig, recipe: &RecipeSettings) -> EnvSpec {
        EnvSpec::new(self.env, plant.clone(), recipe.clone(), self.reward)
    }
}

/// Frozen inputs of a training run, as written to `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSnapshot {
    pub train: TrainConfig,
    pub plant: PlantConfig,
    pub recipe: RecipeSettings,
    pub scales: ObservationScales,
}

impl TrainSnapshot {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub algorithm: Algorithm,
    pub env: EnvKind,
    pub seed: u64,
    pub episodes: usize,
    pub env_steps: u64,
    pub final_mean_return: f64,
    pub final_std_return: f64,
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Trains per `cfg` and writes `config.json`, `weights.json`,
/// `learning_curve.csv` and `metrics.json` into `dir`.
pub fn train_run(
    plant: &PlantConfig,
    recipe: &RecipeSettings,
    cfg: &TrainConfig,
    dir: &Path,
    stamp: &str,
) -> Result<(Mlp, LearningCurve, TrainSummary)> {
    cfg.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let spec = cfg.env_spec(plant, recipe);
    write_json(
        &dir.join("config.json"),
        &TrainSnapshot {
            train: cfg.clone(),
            plant: plant.clone(),
            recipe: recipe.clone(),
            scales: spec.scales,
        },
    )?;
    let factory = || spec.build();
    let (policy, curve, episodes, env_steps) = match cfg.algorithm {
        Algorithm::Td3 => {
            let out = td3_train(&factory, &cfg.td3)?;
            (out.policy, out.curve, out.episodes, out.env_steps)
        }
        Algorithm::Cem => {
            let out = cem_train(&factory, &cfg.cem)?;
            WeightsFile::from_mlp(&out.final_policy, cfg.seed(), stamp).save(&dir.join("weights_final.json"))?;
            (out.policy, out.curve, out.episodes, out.env_steps)
        }
    };
    WeightsFile::from_mlp(&policy, cfg.seed(), stamp).save(&dir.join("weights.json"))?;
    curve.save(&dir.join("learning_curve.csv"))?;
    let last = curve.points.last().copied();
    let summary = TrainSummary {
        algorithm: cfg.algorithm,
        env: cfg.env,
        seed: cfg.seed(),
        episodes,
        env_steps,
        final_mean_return: last.map_or(f64::NAN, |p| p.mean_return),
        final_std_return: last.map_or(f64::NAN, |p| p.std_return),
    };
    write_json(&dir.join("metrics.json"), &summary)?;
    Ok((policy, curve, summary))
}
