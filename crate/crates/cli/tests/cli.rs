use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_recipe-rl"));
    c.env_remove("RECIPE_RL_SEED").env_remove("SOURCE_DATE_EPOCH");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn files_with_suffix(dir: &Path, suffix: &str) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(suffix))
        .count()
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn seed_in(dir: &Path) -> u64 {
    let v: serde_json::Value = serde_json::from_slice(&read(dir.join("run.json"))).unwrap();
    v["seed"].as_u64().unwrap()
}

#[test]
fn baseline_single_episode() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("b");
    ok(&["baseline", "--episodes", "1", "-o", p(&out)]);
    assert_eq!(files_with_suffix(&out.join("episodes"), "_trajectory.csv"), 1);
    assert!(out.join("metrics.json").exists());
    assert!(out.join("run.json").exists());
}

#[test]
fn missing_parameter_file_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["baseline", "--plant", "/no/such/reactor.kv", "-o", p(t.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/reactor.kv"));
}

#[test]
fn bad_flag_value_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["train", "--scenario", "4", "-o", p(t.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cem_training_is_reproducible() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    ok(&["train", "--algo", "cem", "--generations", "2", "--seed", "3", "-o", p(&a)]);
    ok(&["train", "--algo", "cem", "--generations", "2", "--seed", "3", "-o", p(&b)]);
    let curve = String::from_utf8(read(a.join("learning_curve.csv"))).unwrap();
    assert!(curve.lines().count() >= 3);
    for f in ["weights.json", "weights_final.json", "learning_curve.csv", "metrics.json", "config.json", "run.json"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    // the frozen copy alone reproduces the run
    let c = t.path().join("c");
    ok(&["train", "--config", p(&a.join("run.json")), "-o", p(&c)]);
    assert_eq!(read(a.join("weights.json")), read(c.join("weights.json")));
}

#[test]
fn seed_precedence() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 11}"#).unwrap();
    let out = t.path().join("o");
    let args = ["baseline", "--episodes", "1", "--config", p(&cfg), "-o", p(&out)];
    ok(&args);
    assert_eq!(seed_in(&out), 11);
    let o = bin().args(args).env("RECIPE_RL_SEED", "12").output().unwrap();
    assert!(o.status.success());
    assert_eq!(seed_in(&out), 12);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "13"]);
    let o = bin().args(&with_flag).env("RECIPE_RL_SEED", "12").output().unwrap();
    assert!(o.status.success());
    assert_eq!(seed_in(&out), 13);
    let o = bin().args(args).env("RECIPE_RL_SEED", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluate_trained_policy_and_reject_bad_weights() {
    let t = tempfile::tempdir().unwrap();
    let tr = t.path().join("train");
    ok(&["train", "--generations", "1", "-o", p(&tr)]);
    let ev = t.path().join("eval");
    ok(&["evaluate", "--weights", p(&tr.join("weights.json")), "--episodes", "10", "-o", p(&ev)]);
    assert_eq!(files_with_suffix(&ev.join("episodes"), "_summary.json"), 10);
    let bl = t.path().join("base");
    ok(&["baseline", "--episodes", "10", "-o", p(&bl)]);
    let keys = |d: &Path| {
        let v: serde_json::Value = serde_json::from_slice(&read(d.join("metrics.json"))).unwrap();
        v.as_object().unwrap().keys().cloned().collect::<Vec<_>>()
    };
    assert_eq!(keys(&ev), keys(&bl));

    let broken = t.path().join("broken.json");
    std::fs::write(&broken, "{\"arch\": [40, 50").unwrap();
    let o = run(&["evaluate", "--weights", p(&broken), "-o", p(&t.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = t.path().join("small.json");
    std::fs::write(&cfg, r#"{"train": {"cem": {"hidden": [8]}}}"#).unwrap();
    let o = run(&["evaluate", "--config", p(&cfg), "--weights", p(&tr.join("weights.json")), "-o", p(&t.path().join("y"))]);
    assert_eq!(o.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("[40, 50, 50, 1]") && msg.contains("[40, 8, 1]"), "{msg}");
}

#[test]
fn grid_resumes_and_ranks_every_cell() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("g");
    let args = ["grid", "--algo", "cem", "--generations", "1", "--episodes", "2", "--workers", "2", "-o", p(&out)];
    let first = ok(&args);
    assert!(first.contains("2 cells ok (0 resumed)"), "{first}");
    let ranked = String::from_utf8(read(out.join("ranked.csv"))).unwrap();
    assert_eq!(ranked.lines().count(), 3);
    let results = read(out.join("results.csv"));
    std::fs::remove_dir_all(out.join("cells/0001")).unwrap();
    let second = ok(&args);
    assert!(second.contains("2 cells ok (1 resumed)"), "{second}");
    assert_eq!(read(out.join("results.csv")), results);
}

#[test]
fn one_cell_grid_equals_train_then_evaluate() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("grid.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 5, "grid": {"algorithm": "cem", "archs": [[50, 50]], "batches": [], "lrs": [],
            "noises": [0.05], "buffers": [], "scenarios": ["hybrid"]}}"#,
    )
    .unwrap();
    let g = t.path().join("g");
    ok(&["grid", "--config", p(&cfg), "--generations", "2", "--episodes", "3", "-o", p(&g)]);
    let tr = t.path().join("t");
    ok(&["train", "--seed", "5", "--scenario", "3", "--generations", "2", "-o", p(&tr)]);
    let ev = t.path().join("e");
    ok(&["evaluate", "--weights", p(&tr.join("weights.json")), "--scenario", "3", "--episodes", "3", "-o", p(&ev)]);
    assert_eq!(read(g.join("cells/0000/train/weights.json")), read(tr.join("weights.json")));
    assert_eq!(read(g.join("cells/0000/eval/metrics.json")), read(ev.join("metrics.json")));
}

#[test]
fn direct_reference_trains() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("d");
    let s = ok(&["train", "--env", "direct", "--scenario", "2", "--algo", "cem", "--generations", "1", "-o", p(&out)]);
    assert!(s.contains("direct"));
    let v: serde_json::Value = serde_json::from_slice(&read(out.join("weights.json"))).unwrap();
    assert_eq!(v["arch"][0].as_u64(), Some(14));
}

#[test]
fn simulate_replays_inputs() {
    let t = tempfile::tempdir().unwrap();
    let input = t.path().join("in.csv");
    let mut text = String::from("m_dot_feed,T_J_in,T_CW_EHE_in\n");
    for _ in 0..20 {
        text.push_str("2,362,340\n");
    }
    std::fs::write(&input, text).unwrap();
    let out = t.path().join("s");
    ok(&["simulate", "--inputs", p(&input), "-o", p(&out)]);
    let traj = String::from_utf8(read(out.join("trajectory.csv"))).unwrap();
    assert_eq!(traj.lines().count(), 21);

    std::fs::write(&input, "m_dot_feed,T_J_in,T_CW_EHE_in\n1e9,362,340\n").unwrap();
    let o = run(&["simulate", "--inputs", p(&input), "-o", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn created_at_follows_source_date_epoch() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("t");
    let o = bin()
        .args(["train", "--generations", "1", "-o", p(&out)])
        .env("SOURCE_DATE_EPOCH", "86400")
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&read(out.join("weights.json"))).unwrap();
    assert_eq!(v["created_at"], "1970-01-02T00:00:00Z");
}
