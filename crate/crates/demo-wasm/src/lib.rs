//! Browser demo: recipe simulation, expert boxes and a PI step response.
//! The `*_json` functions are plain Rust so they can be tested natively;
//! the exported wrappers only convert errors.

use recipe_rl::bounds::Interval;
use recipe_rl::control::{pid_step, PidConfig, PidState};
use recipe_rl::env::{Env, ObservationScales, RecipeEnv, RewardConfig};
use recipe_rl::reactor::PlantConfig;
use recipe_rl::recipe::program::STEPS;
use recipe_rl::recipe::{RecipeSettings, N_PARAMS};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct ParamInfo {
    c: usize,
    phase: usize,
    description: &'static str,
    lo: f64,
    hi: f64,
    baseline: f64,
}

#[derive(Serialize, Default)]
struct Series {
    t_h: Vec<f64>,
    t_reactor: Vec<f64>,
    t_adiabatic: Vec<f64>,
    feed: Vec<f64>,
    m_product: Vec<f64>,
    phase: Vec<usize>,
}

#[derive(Serialize)]
struct Simulation {
    series: Series,
    batch_time_h: f64,
    n_cv: usize,
    terminated: bool,
    truncated: bool,
    reward: f64,
    t_reactor_bounds: [f64; 2],
    t_adiabatic_max: f64,
}

/// The 14 recipe parameters with their expert boxes and baseline values.
pub fn parameters_json() -> String {
    let s = RecipeSettings::default();
    let info: Vec<ParamInfo> = STEPS
        .iter()
        .map(|st| ParamInfo {
            c: st.c,
            phase: st.phase,
            description: st.description,
            lo: s.boxes[st.c - 1].lo,
            hi: s.boxes[st.c - 1].hi,
            baseline: s.baseline[st.c - 1],
        })
        .collect();
    serde_json::to_string(&info).expect("serializable")
}

/// Runs the recipe `theta` (physical values, clamped into the boxes) from
/// the initial state drawn with `seed`.
pub fn simulate_json(theta: &[f64], seed: u64) -> Result<String, String> {
    if theta.len() != N_PARAMS {
        return Err(format!("expected {N_PARAMS} parameters, got {}", theta.len()));
    }
    let plant = PlantConfig::default();
    let bounds = plant.model.constraints;
    let mut env = RecipeEnv::new(plant, RecipeSettings::default(), RewardConfig::default(), ObservationScales::default());
    env.reset(seed).map_err(|e| e.to_string())?;
    for (i, v) in theta.iter().enumerate() {
        let a = env.action_for(i + 1, *v).clamp(-1.0, 1.0);
        if env.step(&[a]).map_err(|e| e.to_string())?.done() {
            break;
        }
    }
    let stats = env.stats();
    let mut series = Series::default();
    for r in env.trajectory() {
        series.t_h.push(r.t_s / 3600.0);
        series.t_reactor.push(r.state.t_reactor);
        series.t_adiabatic.push(r.state.t_adiabatic);
        series.feed.push(r.input.feed());
        series.m_product.push(r.state.m_product);
        series.phase.push(r.recipe.map_or(0, |p| p.0));
    }
    let out = Simulation {
        series,
        batch_time_h: stats.batch_time_s / 3600.0,
        n_cv: stats.n_cv,
        terminated: stats.terminated,
        truncated: stats.truncated,
        reward: stats.undiscounted_return,
        t_reactor_bounds: [bounds.reactor_temp.lo, bounds.reactor_temp.hi],
        t_adiabatic_max: bounds.adiabatic_temp_max,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct StepResponse {
    t: Vec<f64>,
    y: Vec<f64>,
    u: Vec<f64>,
}

/// Unit setpoint step for a PI loop around `y' = -0.01 y + 0.02 u`,
/// discretized exactly with 1 s steps. Gains use the textbook sign
/// (u grows with r - y).
pub fn step_response_json(kp: f64, ki: f64, steps: usize) -> Result<String, String> {
    if !(kp.is_finite() && ki.is_finite()) || steps == 0 || steps > 100_000 {
        return Err("gains must be finite and steps in 1..=100000".into());
    }
    let (a, b) = (-0.01f64, 0.02f64);
    let phi = a.exp();
    let gamma = b * (phi - 1.0) / a;
    let cfg = PidConfig {
        // the controller's error is y - r
        kp: -kp,
        ki: -ki,
        kd: 0.0,
        setpoint: 1.0,
        u_ss: 0.0,
        output: Interval::new(-50.0, 50.0).map_err(|e| e.to_string())?,
    };
    let mut st = PidState::default();
    let mut y = 0.0;
    let mut out = StepResponse { t: vec![0.0], y: vec![0.0], u: vec![0.0] };
    for k in 1..=steps {
        let (u, next) = pid_step(&cfg, &st, y, 1.0);
        st = next;
        y = phi * y + gamma * u;
        out.t.push(k as f64);
        out.y.push(y);
        out.u.push(u);
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn parameters() -> String {
    parameters_json()
}

#[wasm_bindgen]
pub fn simulate(theta: Vec<f64>, seed: u32) -> Result<String, JsValue> {
    simulate_json(&theta, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn step_response(kp: f64, ki: f64, steps: u32) -> Result<String, JsValue> {
    step_response_json(kp, ki, steps as usize).map_err(|e| JsValue::from_str(&e))
}
