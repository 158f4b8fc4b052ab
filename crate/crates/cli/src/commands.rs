use std::path::Path;

use recipe_rl::env::{DirectEnv, Env, EnvKind, EnvSpec, ObservationScales};
use recipe_rl::harness::{
    evaluate as run_eval, run_grid, train_run, write_json, Algorithm, BaselinePolicy, EvalMetrics, GridConfig,
};
use recipe_rl::neural::WeightsFile;
use recipe_rl::reactor::{write_trajectory_csv, ControlInput};
use recipe_rl::{Error, Result};
use serde::Deserialize;

use crate::config::RunConfig;

fn prepare(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_json(&out.join("run.json"), cfg)
}

fn spec(cfg: &RunConfig, kind: EnvKind) -> EnvSpec {
    EnvSpec::new(kind, cfg.plant().clone(), cfg.recipe().clone(), cfg.train.reward)
}

fn report(m: &EvalMetrics) {
    println!(
        "episodes {}  t_batch {:.3} ± {:.3} h  n_cv {:.2}  n_cv_rel {:.3} %  completed {:.0} %",
        m.n_episodes,
        m.mean_t_batch_h,
        m.std_t_batch_h,
        m.mean_ncv,
        m.mean_ncv_rel,
        100.0 * m.completion_rate
    );
}

pub fn baseline(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let spec = spec(cfg, EnvKind::Recipe);
    let policy = BaselinePolicy::new(cfg.recipe());
    let r = run_eval(&spec, &policy, cfg.eval_episodes, cfg.eval_base_seed, Some(out))?;
    report(&r.metrics);
    Ok(())
}

pub fn train(cfg: &RunConfig, out: &Path, stamp: &str) -> Result<()> {
    prepare(cfg, out)?;
    let (_, curve, s) = train_run(cfg.plant(), cfg.recipe(), &cfg.train, out, stamp)?;
    println!(
        "{} on {} env: {} episodes, {} steps, {} curve points, final return {:.4}",
        s.algorithm.name(),
        s.env.name(),
        s.episodes,
        s.env_steps,
        curve.points.len(),
        s.final_mean_return
    );
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, weights: &Path, out: &Path) -> Result<()> {
    let net = WeightsFile::load(weights)?.to_mlp()?;
    let spec = spec(cfg, cfg.train.env);
    let env = spec.build();
    let hidden = match cfg.train.algorithm {
        Algorithm::Td3 => &cfg.train.td3.actor_hidden,
        Algorithm::Cem => &cfg.train.cem.hidden,
    };
    let mut expected = vec![env.obs_dim()];
    expected.extend(hidden);
    expected.push(env.act_dim());
    if net.arch() != expected {
        return Err(Error::Shape(format!(
            "{}: weights have shape {:?}, the configuration expects {:?}",
            weights.display(),
            net.arch(),
            expected
        )));
    }
    prepare(cfg, out)?;
    let r = run_eval(&spec, &net, cfg.eval_episodes, cfg.eval_base_seed, Some(out))?;
    report(&r.metrics);
    Ok(())
}

pub fn grid(cfg: &RunConfig, out: &Path, stamp: &str) -> Result<()> {
    prepare(cfg, out)?;
    let gc = GridConfig {
        template: cfg.train.clone(),
        plant: cfg.plant().clone(),
        recipe: cfg.recipe().clone(),
        eval_episodes: cfg.eval_episodes,
        eval_base_seed: cfg.eval_base_seed,
        train_seed_base: cfg.seed,
    };
    let g = run_grid(&cfg.grid_spec(), &gc, out, stamp)?;
    println!(
        "{} cells ok ({} resumed), {} failed",
        g.results.len(),
        g.resumed,
        g.failures.len()
    );
    for (id, msg) in &g.failures {
        eprintln!("cell {id}: {msg}");
    }
    if let Some(best) = g.ranked.first() {
        println!(
            "best cell {}: t_batch {:.3} h, n_cv_rel {:.3} %, completed {:.0} %",
            best.cell.cell_id,
            best.mean_t_batch_h,
            best.mean_ncv_rel,
            100.0 * best.completion_rate
        );
        Ok(())
    } else {
        Err(Error::Contract("every grid cell failed".into()))
    }
}

#[derive(Debug, Deserialize)]
struct InputRow {
    m_dot_feed: f64,
    #[serde(rename = "T_J_in")]
    t_j_in: f64,
    #[serde(rename = "T_CW_EHE_in")]
    t_cw_ehe_in: f64,
}

pub fn simulate(cfg: &RunConfig, inputs: &Path, ic_seed: u64, out: &Path) -> Result<()> {
    let file = std::fs::File::open(inputs).map_err(|e| Error::io(inputs, e))?;
    let bad = |e: csv::Error| Error::Config(format!("{}: {e}", inputs.display()));
    let rows: Vec<InputRow> = csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(bad)?;
    if rows.is_empty() {
        return Err(Error::Config(format!("{}: no input rows", inputs.display())));
    }
    prepare(cfg, out)?;
    let box_ = cfg.plant().model.actuators;
    let mut env = DirectEnv::new(
        cfg.plant().clone(),
        cfg.recipe().clone(),
        cfg.train.reward,
        ObservationScales::default(),
    );
    env.reset(ic_seed)?;
    for (i, r) in rows.iter().enumerate() {
        let u = ControlInput::new(r.m_dot_feed, r.t_j_in, r.t_cw_ehe_in, &box_)
            .map_err(|e| Error::Config(format!("{} row {}: {e}", inputs.display(), i + 1)))?;
        if env.step(&env.action_for(&u))?.done() {
            break;
        }
    }
    let path = out.join("trajectory.csv");
    let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_trajectory_csv(f, &env.trajectory())?;
    let stats = env.stats();
    write_json(&out.join("summary.json"), &stats)?;
    println!(
        "{} intervals, t = {:.3} h, n_cv {}, terminated {}, truncated {}",
        stats.n_intervals,
        stats.batch_time_s / 3600.0,
        stats.n_cv,
        stats.terminated,
        stats.truncated
    );
    Ok(())
}
