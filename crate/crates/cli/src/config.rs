use std::path::{Path, PathBuf};

use recipe_rl::harness::{Algorithm, GridSpec, TrainConfig, EVAL_SEED_BASE};
use recipe_rl::reactor::PlantConfig;
use recipe_rl::recipe::RecipeSettings;
use recipe_rl::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "RECIPE_RL_SEED";

/// A run configuration. Files named here are read once and inlined, so the
/// `run.json` copy written into every run directory is self-contained and
/// can be passed back via `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub plant_file: Option<PathBuf>,
    pub recipe_file: Option<PathBuf>,
    pub plant: Option<PlantConfig>,
    pub recipe: Option<RecipeSettings>,
    pub train: TrainConfig,
    /// training seed; evaluation seeds come from `eval_base_seed`
    pub seed: u64,
    pub eval_episodes: usize,
    pub eval_base_seed: u64,
    pub grid: Option<GridSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plant_file: None,
            recipe_file: None,
            plant: None,
            recipe: None,
            train: TrainConfig::default(),
            seed: 0,
            eval_episodes: 10,
            eval_base_seed: EVAL_SEED_BASE,
            grid: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Seed precedence: flag, then `RECIPE_RL_SEED`, then the file.
    pub fn apply_seed(&mut self, flag: Option<u64>, env: Option<&str>) -> Result<()> {
        if let Some(s) = flag {
            self.seed = s;
        } else if let Some(v) = env {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        self.train = self.train.clone().with_seed(self.seed);
        Ok(())
    }

    /// Reads any referenced files and checks the result.
    pub fn resolve(mut self) -> Result<Self> {
        if let Some(p) = self.plant_file.take() {
            self.plant = Some(PlantConfig::load(&p)?);
        }
        if let Some(p) = self.recipe_file.take() {
            self.recipe = Some(RecipeSettings::load(&p)?);
        }
        self.plant.get_or_insert_with(PlantConfig::default).model.validate()?;
        self.recipe.get_or_insert_with(RecipeSettings::default);
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be positive".into()));
        }
        if self.eval_base_seed < EVAL_SEED_BASE {
            return Err(Error::Config(format!("eval_base_seed must be >= {EVAL_SEED_BASE}")));
        }
        self.train.validate()?;
        Ok(self)
    }

    pub fn plant(&self) -> &PlantConfig {
        self.plant.as_ref().expect("resolved config")
    }

    pub fn recipe(&self) -> &RecipeSettings {
        self.recipe.as_ref().expect("resolved config")
    }

    /// The configured grid, or the default one for the training algorithm
    /// and scenario.
    pub fn grid_spec(&self) -> GridSpec {
        if let Some(g) = &self.grid {
            return g.clone();
        }
        let scenarios = vec![self.train.reward.scenario];
        match self.train.algorithm {
            Algorithm::Td3 => GridSpec::td3_full(scenarios),
            Algorithm::Cem => GridSpec {
                algorithm: Algorithm::Cem,
                archs: vec![vec![50, 50], vec![50, 25, 10]],
                batches: vec![],
                lrs: vec![],
                noises: vec![self.train.cem.init_std],
                buffers: vec![],
                scenarios,
            },
        }
    }
}

/// `SOURCE_DATE_EPOCH` as RFC 3339, or the epoch itself.
pub fn created_at(source_date_epoch: Option<&str>) -> String {
    source_date_epoch
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0))
        .map(|t| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
        .unwrap_or_else(|| "1970-01-01T00:00:00Z".to_string())
}
