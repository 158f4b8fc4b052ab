mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recipe_rl::env::{EnvKind, Scenario};
use recipe_rl::harness::Algorithm;
use recipe_rl::Result;

use crate::config::{RunConfig, SEED_ENV};

#[derive(Parser, Debug)]
#[command(name = "recipe-rl", version, about = "Recipe-parameter RL for a semi-batch polymerization reactor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the fixed expert recipe
    Baseline(Common),
    /// Train a policy
    Train(Common),
    /// Evaluate saved policy weights
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// weights JSON written by `train`
        #[arg(long)]
        weights: PathBuf,
    },
    /// Train and evaluate every cell of a hyperparameter grid
    Grid(Common),
    /// Replay an input CSV (m_dot_feed,T_J_in,T_CW_EHE_in per 30 s interval)
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        inputs: PathBuf,
        /// initial-condition seed
        #[arg(long, default_value_t = recipe_rl::harness::EVAL_SEED_BASE + 1)]
        ic_seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Td3,
    Cem,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnvArg {
    Recipe,
    Direct,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// run configuration JSON
    #[arg(long)]
    config: Option<PathBuf>,
    /// reactor parameter file
    #[arg(long)]
    plant: Option<PathBuf>,
    /// recipe and expert-box file
    #[arg(long)]
    recipe: Option<PathBuf>,
    /// output directory
    #[arg(long, short)]
    out: PathBuf,
    /// training seed (overrides RECIPE_RL_SEED and the config file)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    algo: Option<AlgoArg>,
    #[arg(long)]
    env: Option<EnvArg>,
    /// 1 maximize product, 2 minimize time, 3 hybrid
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    scenario: Option<u8>,
    /// CEM generations
    #[arg(long)]
    generations: Option<usize>,
    /// TD3 environment steps
    #[arg(long)]
    steps: Option<usize>,
    /// temperature back-off in the training penalty [K]
    #[arg(long)]
    backoff: Option<f64>,
    /// evaluation episodes
    #[arg(long)]
    episodes: Option<usize>,
    /// worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.plant {
            cfg.plant_file = Some(p.clone());
        }
        if let Some(p) = &self.recipe {
            cfg.recipe_file = Some(p.clone());
        }
        let t = &mut cfg.train;
        if let Some(a) = self.algo {
            t.algorithm = match a {
                AlgoArg::Td3 => Algorithm::Td3,
                AlgoArg::Cem => Algorithm::Cem,
            };
        }
        if let Some(e) = self.env {
            t.env = match e {
                EnvArg::Recipe => EnvKind::Recipe,
                EnvArg::Direct => EnvKind::Direct,
            };
        }
        if let Some(s) = self.scenario {
            t.reward.scenario = Scenario::from_index(s as usize)?;
        }
        if let Some(g) = self.generations {
            t.cem.generations = g;
        }
        if let Some(s) = self.steps {
            t.td3.total_steps = s;
        }
        if let Some(b) = self.backoff {
            t.reward.backoff = b;
        }
        if let Some(n) = self.episodes {
            cfg.eval_episodes = n;
        }
        let env_seed = std::env::var(SEED_ENV).ok();
        cfg.apply_seed(self.seed, env_seed.as_deref())?;
        cfg.resolve()
    }
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Baseline(c) | Command::Train(c) | Command::Grid(c) => c,
        Command::Evaluate { common, .. } | Command::Simulate { common, .. } => common,
    };
    if let Some(n) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| recipe_rl::Error::Config(format!("--workers: {e}")))?;
    }
    let cfg = common.run_config()?;
    let stamp = config::created_at(std::env::var("SOURCE_DATE_EPOCH").ok().as_deref());
    let out = &common.out;
    match &cli.command {
        Command::Baseline(_) => commands::baseline(&cfg, out),
        Command::Train(_) => commands::train(&cfg, out, &stamp),
        Command::Evaluate { weights, .. } => commands::evaluate(&cfg, weights, out),
        Command::Grid(_) => commands::grid(&cfg, out, &stamp),
        Command::Simulate { inputs, ic_seed, .. } => commands::simulate(&cfg, inputs, *ic_seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
