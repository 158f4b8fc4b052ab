use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::evaluate;
use super::run::{train_run, write_json, Algorithm, TrainConfig};
use crate::env::Scenario;
use crate::error::{Error, Result};
use crate::reactor::PlantConfig;
use crate::recipe::RecipeSettings;

pub const RESULTS_HEADER: &str = "cell_id,algorithm,arch,batch,lr,noise,buffer,scenario,seed,mean_t_batch_h,std_t_batch_h,mean_ncv,mean_ncv_rel,completion_rate";

/// Hyperparameter axes. TD3 cells span the full cross product; CEM has no
/// batch, learning rate or buffer, so its cells span architecture, noise
/// (used as the initial sampling std) and scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub algorithm: Algorithm,
    pub archs: Vec<Vec<usize>>,
    pub batches: Vec<usize>,
    pub lrs: Vec<f64>,
    pub noises: Vec<f64>,
    pub buffers: Vec<usize>,
    pub scenarios: Vec<Scenario>,
}

impl GridSpec {
    /// Full TD3 grid, 48 cells per scenario.
    pub fn td3_full(scenarios: Vec<Scenario>) -> Self {
        Self {
            algorithm: Algorithm::Td3,
            archs: vec![vec![50, 50], vec![50, 25, 10]],
            batches: vec![512, 4096],
            lrs: vec![3e-4, 1e-5],
            noises: vec![0.0, 0.1],
            buffers: vec![1_000_000, 100_000, 10_000],
            scenarios,
        }
    }

    pub fn cells(&self, seed_base: u64) -> Vec<GridCell> {
        let mut out = Vec::new();
        let mut push = |arch: &Vec<usize>, batch, lr, noise, buffer, scenario| {
            let id = out.len();
            out.push(GridCell {
                cell_id: id,
                algorithm: self.algorithm,
                arch: arch.clone(),
                batch,
                lr,
                noise,
                buffer,
                scenario,
                seed: seed_base + id as u64,
            });
        };
        for &scenario in &self.scenarios {
            for arch in &self.archs {
                match self.algorithm {
                    Algorithm::Td3 => {
                        for &batch in &self.batches {
                            for &lr in &self.lrs {
                                for &noise in &self.noises {
                                    for &buffer in &self.buffers {
                                        push(arch, Some(batch), Some(lr), Some(noise), Some(buffer), scenario);
                                    }
                                }
                            }
                        }
                    }
                    Algorithm::Cem => {
                        for &noise in &self.noises {
                            push(arch, None, None, Some(noise), None, scenario);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub cell_id: usize,
    pub algorithm: Algorithm,
    pub arch: Vec<usize>,
    pub batch: Option<usize>,
    pub lr: Option<f64>,
    pub noise: Option<f64>,
    pub buffer: Option<usize>,
    pub scenario: Scenario,
    pub seed: u64,
}

impl GridCell {
    /// The template with this cell's values filled in.
    pub fn train_config(&self, template: &TrainConfig) -> TrainConfig {
        let mut cfg = template.clone().with_seed(self.seed);
        cfg.algorithm = self.algorithm;
        cfg.reward.scenario = self.scenario;
        match self.algorithm {
            Algorithm::Td3 => {
                let t = &mut cfg.td3;
                t.actor_hidden = self.arch.clone();
                t.critic_hidden = self.arch.clone();
                t.batch_size = self.batch.unwrap_or(t.batch_size);
                t.lr = self.lr.unwrap_or(t.lr);
                t.expl_noise = self.noise.unwrap_or(t.expl_noise);
                t.buffer_capacity = self.buffer.unwrap_or(t.buffer_capacity);
            }
            Algorithm::Cem => {
                cfg.cem.hidden = self.arch.clone();
                cfg.cem.init_std = self.noise.unwrap_or(cfg.cem.init_std);
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cell: GridCell,
    pub mean_t_batch_h: f64,
    pub std_t_batch_h: f64,
    pub mean_ncv: f64,
    pub mean_ncv_rel: f64,
    pub completion_rate: f64,
}

impl GridCell {
    fn record(&self) -> Vec<String> {
        let c = self;
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            c.cell_id.to_string(),
            c.algorithm.name().to_string(),
            c.arch.iter().map(usize::to_string).collect::<Vec<_>>().join("-"),
            opt(c.batch.map(|v| v.to_string())),
            opt(c.lr.map(|v| format!("{v:?}"))),
            opt(c.noise.map(|v| format!("{v:?}"))),
            opt(c.buffer.map(|v| v.to_string())),
            c.scenario.index().to_string(),
            c.seed.to_string(),
        ]
    }
}

impl GridResult {
    fn record(&self) -> Vec<String> {
        let mut rec = self.cell.record();
        rec.extend([
            format!("{:?}", self.mean_t_batch_h),
            format!("{:?}", self.std_t_batch_h),
            format!("{:?}", self.mean_ncv),
            format!("{:?}", self.mean_ncv_rel),
            format!("{:?}", self.completion_rate),
        ]);
        rec
    }
}

/// Completion rate descending, relative violations ascending, batch time
/// ascending, cell id as the final tie-break.
pub fn rank_results(results: &[GridResult]) -> Vec<GridResult> {
    let mut ranked = results.to_vec();
    ranked.sort_by(|a, b| {
        b.completion_rate
            .total_cmp(&a.completion_rate)
            .then(a.mean_ncv_rel.total_cmp(&b.mean_ncv_rel))
            .then(a.mean_t_batch_h.total_cmp(&b.mean_t_batch_h))
            .then(a.cell.cell_id.cmp(&b.cell.cell_id))
    });
    ranked
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub template: TrainConfig,
    pub plant: PlantConfig,
    pub recipe: RecipeSettings,
    pub eval_episodes: usize,
    pub eval_base_seed: u64,
    pub train_seed_base: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub results: Vec<GridResult>,
    pub ranked: Vec<GridResult>,
    pub failures: Vec<(usize, String)>,
    /// cells skipped because a previous run completed them
    pub resumed: usize,
}

/// Failed cells follow the results with empty metric fields.
fn write_table(path: &Path, rows: &[GridResult], failed: &[&GridCell]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    w.write_record(RESULTS_HEADER.split(',')).map_err(to_err)?;
    for r in rows {
        w.write_record(r.record()).map_err(to_err)?;
    }
    for c in failed {
        let mut rec = c.record();
        rec.resize(RESULTS_HEADER.split(',').count(), String::new());
        w.write_record(rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn run_cell(cell: &GridCell, cfg: &GridConfig, dir: &Path, stamp: &str) -> Result<GridResult> {
    let train = cell.train_config(&cfg.template);
    let (policy, _, _) = train_run(&cfg.plant, &cfg.recipe, &train, &dir.join("train"), stamp)?;
    let spec = train.env_spec(&cfg.plant, &cfg.recipe);
    let report = evaluate(&spec, &policy, cfg.eval_episodes, cfg.eval_base_seed, Some(&dir.join("eval")))?;
    let m = report.metrics;
    Ok(GridResult {
        cell: cell.clone(),
        mean_t_batch_h: m.mean_t_batch_h,
        std_t_batch_h: m.std_t_batch_h,
        mean_ncv: m.mean_ncv,
        mean_ncv_rel: m.mean_ncv_rel,
        completion_rate: m.completion_rate,
    })
}

/// Trains and evaluates every cell not already finished under `out`,
/// then writes `results.csv` (cell order), `ranked.csv` and
/// `failures.csv`. Both tables list every cell. A failing cell is recorded and does not stop the grid.
/// Cells run on the current rayon pool.
pub fn run_grid(spec: &GridSpec, cfg: &GridConfig, out: &Path, stamp: &str) -> Result<GridOutcome> {
    let cells = spec.cells(cfg.train_seed_base);
    if cells.is_empty() {
        return Err(Error::Config("grid has no cells".into()));
    }
    let cells_dir = out.join("cells");
    std::fs::create_dir_all(&cells_dir).map_err(|e| Error::io(&cells_dir, e))?;
    write_json(&out.join("grid.json"), spec)?;

    let outcomes: Vec<(Result<GridResult>, bool)> = cells
        .par_iter()
        .map(|cell| {
            let dir = cells_dir.join(format!("{:04}", cell.cell_id));
            let done = dir.join("result.json");
            if let Ok(text) = std::fs::read_to_string(&done) {
                if let Ok(r) = serde_json::from_str::<GridResult>(&text) {
                    if r.cell == *cell {
                        return (Ok(r), true);
                    }
                }
            }
            let res = run_cell(cell, cfg, &dir, stamp).and_then(|r| {
                write_json(&done, &r)?;
                Ok(r)
            });
            (res, false)
        })
        .collect();

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut resumed = 0;
    for (cell, (res, skipped)) in cells.iter().zip(outcomes) {
        resumed += skipped as usize;
        match res {
            Ok(r) => results.push(r),
            Err(e) => failures.push((cell.cell_id, e.to_string())),
        }
    }
    let ranked = rank_results(&results);
    let failed: Vec<&GridCell> = failures.iter().map(|(id, _)| &cells[*id]).collect();
    write_table(&out.join("results.csv"), &results, &failed)?;
    write_table(&out.join("ranked.csv"), &ranked, &failed)?;
    let path = out.join("failures.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    w.write_record(["cell_id", "error"]).map_err(to_err)?;
    for (id, msg) in &failures {
        w.write_record([id.to_string(), msg.clone()]).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(GridOutcome {
        results,
        ranked,
        failures,
        resumed,
    })
}
