use std::fs::File;

use recipe_rl::env::{EnvKind, EnvSpec, RewardConfig, Scenario};
use recipe_rl::harness::{
    evaluate, rank_results, run_grid, train_run, Algorithm, BaselinePolicy, EvalMetrics, GridCell,
    GridConfig, GridResult, GridSpec, TrainConfig, TrainSnapshot, EVAL_SEED_BASE, RESULTS_HEADER,
};
use recipe_rl::neural::WeightsFile;
use recipe_rl::reactor::{read_violation_column, PlantConfig};
use recipe_rl::recipe::RecipeSettings;
use recipe_rl::trainer::CemConfig;

fn recipe_spec() -> EnvSpec {
    EnvSpec::new(EnvKind::Recipe, PlantConfig::default(), RecipeSettings::default(), RewardConfig::default())
}

fn tiny_cem() -> TrainConfig {
    TrainConfig {
        cem: CemConfig {
            hidden: vec![4],
            population: 2,
            generations: 1,
            eval_episodes: 1,
            ..CemConfig::default()
        },
        ..TrainConfig::default()
    }
}

#[test]
fn metrics_match_raw_trajectories() {
    let spec = recipe_spec();
    let policy = BaselinePolicy::new(&spec.recipe);
    let dir = tempfile::tempdir().unwrap();
    let report = evaluate(&spec, &policy, 3, EVAL_SEED_BASE, Some(dir.path())).unwrap();
    let mut total = 0;
    for ep in &report.episodes {
        let path = dir.path().join("episodes").join(format!("{}_trajectory.csv", ep.seed));
        let (ncv, rows) = read_violation_column(File::open(path).unwrap()).unwrap();
        assert_eq!(ncv, ep.n_cv);
        assert!(rows >= ep.n_intervals, "{rows} rows for {} intervals", ep.n_intervals);
        total += ncv;
    }
    let m = report.metrics;
    assert!((m.mean_ncv - total as f64 / 3.0).abs() < 1e-12);
    let seeds: Vec<u64> = report.episodes.iter().map(|e| e.seed).collect();
    assert_eq!(seeds, vec![EVAL_SEED_BASE + 1, EVAL_SEED_BASE + 2, EVAL_SEED_BASE + 3]);
    let on_disk: EvalMetrics =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(on_disk, m);
}

#[test]
fn single_episode_has_zero_spread() {
    let spec = recipe_spec();
    let report = evaluate(&spec, &BaselinePolicy::new(&spec.recipe), 1, EVAL_SEED_BASE, None).unwrap();
    let m = report.metrics;
    assert_eq!(m.std_t_batch_h, 0.0);
    assert_eq!(m.std_ncv, 0.0);
    assert_eq!(m.std_return, 0.0);
    assert_eq!(m.completion_rate, 1.0);
    assert_eq!(m.mean_ncv, 0.0);
    assert_eq!(m.mean_ncv_rel, 0.0);
}

#[test]
fn zero_episodes_rejected() {
    let spec = recipe_spec();
    assert!(evaluate(&spec, &BaselinePolicy::new(&spec.recipe), 0, EVAL_SEED_BASE, None).is_err());
}

#[test]
fn train_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_cem().with_seed(7);
    let plant = PlantConfig::default();
    let recipe = RecipeSettings::default();
    let (policy, curve, summary) = train_run(&plant, &recipe, &cfg, dir.path(), "1970-01-01T00:00:00Z").unwrap();
    for f in ["config.json", "weights.json", "weights_final.json", "learning_curve.csv", "metrics.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let snap = TrainSnapshot::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(snap.train, cfg);
    assert_eq!(snap.plant, plant);
    let w = WeightsFile::load(&dir.path().join("weights.json")).unwrap();
    assert_eq!(w.to_mlp().unwrap(), policy);
    assert_eq!(w.seed, 7);
    assert_eq!(summary.episodes, cfg.cem.episode_budget());
    assert_eq!(curve.points.len(), 1);
    let text = std::fs::read_to_string(dir.path().join("learning_curve.csv")).unwrap();
    assert!(text.starts_with("steps,mean_return,std_return"));
}

#[test]
fn training_seed_outside_eval_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_cem().with_seed(EVAL_SEED_BASE + 1);
    let err = train_run(&PlantConfig::default(), &RecipeSettings::default(), &cfg, dir.path(), "x").unwrap_err();
    assert!(err.is_config());
}

#[test]
fn full_td3_grid_has_48_cells_per_scenario() {
    let spec = GridSpec::td3_full(Scenario::ALL.to_vec());
    let cells = spec.cells(0);
    assert_eq!(cells.len(), 48 * 3);
    let ids: Vec<usize> = cells.iter().map(|c| c.cell_id).collect();
    assert_eq!(ids, (0..144).collect::<Vec<_>>());
    let mut keys: Vec<String> = cells
        .iter()
        .map(|c| format!("{:?}{:?}{:?}{:?}{:?}{:?}", c.arch, c.batch, c.lr, c.noise, c.buffer, c.scenario))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 144);
    let cfg = cells[5].train_config(&TrainConfig::default());
    assert_eq!(cfg.algorithm, Algorithm::Td3);
    assert_eq!(Some(cfg.td3.buffer_capacity), cells[5].buffer);
    assert_eq!(cfg.td3.seed, cells[5].seed);
}

fn result(id: usize, completion: f64, ncv_rel: f64, t: f64) -> GridResult {
    GridResult {
        cell: GridCell {
            cell_id: id,
            algorithm: Algorithm::Cem,
            arch: vec![4],
            batch: None,
            lr: None,
            noise: Some(0.05),
            buffer: None,
            scenario: Scenario::Hybrid,
            seed: id as u64,
        },
        mean_t_batch_h: t,
        std_t_batch_h: 0.0,
        mean_ncv: 0.0,
        mean_ncv_rel: ncv_rel,
        completion_rate: completion,
    }
}

#[test]
fn ranking_rule() {
    let rows = vec![
        result(0, 0.8, 0.0, 1.0),
        result(1, 1.0, 2.0, 1.0),
        result(2, 1.0, 0.0, 3.0),
        result(3, 1.0, 0.0, 2.0),
        result(4, 1.0, 0.0, 2.0),
    ];
    let order: Vec<usize> = rank_results(&rows).iter().map(|r| r.cell.cell_id).collect();
    assert_eq!(order, vec![3, 4, 2, 1, 0]);
}

#[test]
fn grid_records_failures_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec {
        algorithm: Algorithm::Cem,
        archs: vec![vec![4]],
        batches: vec![],
        lrs: vec![],
        noises: vec![0.05, -1.0],
        buffers: vec![],
        scenarios: vec![Scenario::Hybrid],
    };
    let cfg = GridConfig {
        template: tiny_cem(),
        plant: PlantConfig::default(),
        recipe: RecipeSettings::default(),
        eval_episodes: 1,
        eval_base_seed: EVAL_SEED_BASE,
        train_seed_base: 100,
    };
    let first = run_grid(&spec, &cfg, dir.path(), "x").unwrap();
    assert_eq!(first.results.len(), 1);
    assert_eq!(first.failures.len(), 1);
    assert_eq!(first.failures[0].0, 1);
    assert_eq!(first.resumed, 0);
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RESULTS_HEADER);
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().ends_with(",,,,,"));
    let ranked = std::fs::read_to_string(dir.path().join("ranked.csv")).unwrap();
    assert_eq!(ranked.lines().count(), 3);
    assert!(dir.path().join("cells/0000/train/weights.json").exists());

    let second = run_grid(&spec, &cfg, dir.path(), "x").unwrap();
    assert_eq!(second.resumed, 1);
    assert_eq!(second.results, first.results);
}
