//! Phase-by-phase execution of a recipe through the plant and cascade.

use serde::{Deserialize, Serialize};

use super::params::{BatchSettings, RecipeParameters, RecipeSettings};
use super::program::{controller_steps, N_PHASES, PHASE_FINAL_STEPS};
use crate::control::{cascade_step, reset, CascadeConfig};
use crate::error::{Error, Result};
use crate::reactor::{
    advance, check_constraints, conversion, ControlInput, ModelParameters, PhysicalState,
    TrajectoryRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitReason {
    /// Phase 1: total mass reached its threshold.
    MassReached,
    /// Phase 2: phase time exceeded its limit.
    TimeLimit,
    /// Phase 2: commanded feed reached the cap.
    FeedCap,
    /// Phases 1 and 2: the whole batch feed has been delivered.
    FeedComplete,
    /// Phase 3: feed delivered and conversion target reached.
    Converged,
    /// Global batch clock hit the truncation time.
    Truncated,
}

impl ExitReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitReason::MassReached => "mass-reached",
            ExitReason::TimeLimit => "time-limit",
            ExitReason::FeedCap => "feed-cap",
            ExitReason::FeedComplete => "feed-complete",
            ExitReason::Converged => "converged",
            ExitReason::Truncated => "truncated",
        }
    }
}

/// Plant state plus the bits of recipe memory that cross phase boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchCursor {
    pub x: PhysicalState,
    /// s since batch start
    pub clock: f64,
    /// kg/h, ramp state (before limiting to the remaining feed)
    pub feed_command: f64,
    pub last_input: Option<ControlInput>,
    pub truncated: bool,
}

impl BatchCursor {
    pub fn start(x: PhysicalState) -> Self {
        Self {
            x,
            clock: 0.0,
            feed_command: 0.0,
            last_input: None,
            truncated: false,
        }
    }
}

/// Record of one simulated phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub phase: usize,
    /// `n_end + 1` states; `states[0]` is the phase entry state.
    pub states: Vec<PhysicalState>,
    /// Input applied over each interval.
    pub inputs: Vec<ControlInput>,
    /// Violated constraints at the end of each interval.
    pub violations: Vec<usize>,
    /// Sum of positive constraint slacks at the end of each interval.
    pub violation_magnitudes: Vec<f64>,
    /// `T_R` setpoint in force during the phase.
    pub reactor_setpoint: f64,
    pub start_clock: f64,
    /// s spent in this phase
    pub elapsed: f64,
    pub dt: f64,
    pub exit: ExitReason,
    pub converged: bool,
    pub truncated: bool,
}

impl PhaseTrace {
    pub fn n_end(&self) -> usize {
        self.inputs.len()
    }

    /// Trajectory rows with the recipe columns filled in.
    pub fn rows(&self) -> Vec<TrajectoryRow> {
        let step_c = PHASE_FINAL_STEPS[self.phase - 1];
        (0..self.n_end())
            .map(|i| TrajectoryRow {
                t_s: self.start_clock + (i + 1) as f64 * self.dt,
                state: self.states[i + 1],
                input: self.inputs[i],
                n_violations: self.violations[i],
                recipe: Some((
                    self.phase,
                    step_c,
                    if i + 1 == self.n_end() {
                        self.exit.as_str().to_string()
                    } else {
                        "running".to_string()
                    },
                )),
            })
            .collect()
    }
}

pub(crate) fn feed_delivered(x: &PhysicalState, batch: &BatchSettings) -> bool {
    x.m_accumulated >= batch.batch_feed_mass - BatchSettings::FEED_TOLERANCE
}

/// Feed actually applied: the ramp command limited so the interval does not
/// deliver more than what is left of the batch feed.
pub(crate) fn limit_to_remaining(command: f64, x: &PhysicalState, batch: &BatchSettings) -> f64 {
    let remaining = (batch.batch_feed_mass - x.m_accumulated).max(0.0);
    command.min(remaining * 3600.0 / batch.control_interval)
}

/// Success predicate of phase `z` (not counting truncation).
pub(crate) fn phase_done(
    z: usize,
    cur: &BatchCursor,
    theta: &RecipeParameters,
    phase_time: f64,
    batch: &BatchSettings,
) -> Result<Option<ExitReason>> {
    let delivered = feed_delivered(&cur.x, batch);
    Ok(match z {
        1 => {
            if cur.x.total_mass() >= theta.require(5)? {
                Some(ExitReason::MassReached)
            } else if delivered {
                Some(ExitReason::FeedComplete)
            } else {
                None
            }
        }
        2 => {
            if phase_time > theta.require(11)? {
                Some(ExitReason::TimeLimit)
            } else if cur.feed_command >= theta.require(10)? {
                Some(ExitReason::FeedCap)
            } else if delivered {
                Some(ExitReason::FeedComplete)
            } else {
                None
            }
        }
        3 => (delivered && conversion(&cur.x)? >= batch.conversion_target)
            .then_some(ExitReason::Converged),
        _ => return Err(Error::Contract(format!("phase {z} out of range"))),
    })
}

/// New ramp command for one interval of phase `z`.
pub(crate) fn ramp(
    z: usize,
    command: f64,
    theta: &RecipeParameters,
    model: &ModelParameters,
    dt: f64,
) -> Result<f64> {
    let dt_h = dt / 3600.0;
    let next = match z {
        1 => command + theta.require(1)? * dt_h,
        2 => (command + theta.require(6)? * dt_h).min(theta.require(10)?),
        _ => command,
    };
    Ok(model.actuators.feed.clamp(next))
}

/// Cascade configured with phase `z`'s setpoint and gains.
pub fn phase_cascade(settings: &RecipeSettings, theta: &RecipeParameters, z: usize) -> Result<CascadeConfig> {
    let (sp, kp, ki) = controller_steps(z);
    Ok(settings
        .cascade
        .with_outer(theta.require(sp)?, theta.require(kp)?, theta.require(ki)?))
}

/// Simulates phase `z` in 30 s control intervals until its exit predicate
/// holds or the batch clock reaches truncation. Controller integrals start
/// from zero in every phase.
pub fn run_phase(
    model: &ModelParameters,
    settings: &RecipeSettings,
    cursor: &BatchCursor,
    theta: &RecipeParameters,
    z: usize,
) -> Result<(PhaseTrace, BatchCursor)> {
    if !(1..=N_PHASES).contains(&z) {
        return Err(Error::Contract(format!("phase {z} out of range")));
    }
    let final_c = PHASE_FINAL_STEPS[z - 1];
    if theta.n_set() < final_c {
        return Err(Error::Contract(format!(
            "phase {z} needs theta_1..theta_{final_c} set, have {}",
            theta.n_set()
        )));
    }
    let batch = &settings.batch;
    let dt = batch.control_interval;
    let cascade = phase_cascade(settings, theta, z)?;
    let mut cs = reset(&cascade);
    let mut cur = *cursor;
    let mut trace = PhaseTrace {
        phase: z,
        states: vec![cur.x],
        inputs: Vec::new(),
        violations: Vec::new(),
        violation_magnitudes: Vec::new(),
        reactor_setpoint: cascade.outer.setpoint,
        start_clock: cur.clock,
        elapsed: 0.0,
        dt,
        exit: ExitReason::Truncated,
        converged: false,
        truncated: false,
    };
    let wrap = |clock: f64| {
        move |e: Error| match e {
            Error::Simulation(m) => Error::Simulation(format!("phase {z} at t = {clock} s: {m}")),
            other => other,
        }
    };
    loop {
        if cur.truncated {
            break;
        }
        if let Some(reason) = phase_done(z, &cur, theta, trace.elapsed, batch)? {
            trace.exit = reason;
            trace.converged = reason == ExitReason::Converged;
            break;
        }
        if cur.clock >= batch.truncation_time {
            cur.truncated = true;
            break;
        }
        cur.feed_command = ramp(z, cur.feed_command, theta, model, dt)?;
        let feed = limit_to_remaining(cur.feed_command, &cur.x, batch);
        let (out, next_cs) = cascade_step(&cascade, &cs, &cur.x, dt)?;
        cs = next_cs;
        let u = ControlInput::saturated(feed, out.jacket_inlet, out.ehe_inlet, &model.actuators);
        let x_next = advance(&cur.x, &u, dt, batch.integrator_step, model).map_err(wrap(cur.clock))?;
        let report = check_constraints(&x_next, &u, model);
        cur.x = x_next;
        cur.clock += dt;
        cur.last_input = Some(u);
        trace.elapsed += dt;
        trace.states.push(x_next);
        trace.inputs.push(u);
        trace.violations.push(report.count());
        trace.violation_magnitudes.push(report.magnitude());
    }
    if cur.truncated {
        trace.exit = ExitReason::Truncated;
        trace.truncated = z == N_PHASES;
    }
    Ok((trace, cur))
}

/// Outcome of executing all three phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeRun {
    pub phases: Vec<PhaseTrace>,
    pub end: BatchCursor,
}

impl RecipeRun {
    pub fn converged(&self) -> bool {
        self.phases.last().is_some_and(|p| p.converged)
    }

    pub fn batch_time(&self) -> f64 {
        self.end.clock
    }

    pub fn n_intervals(&self) -> usize {
        self.phases.iter().map(PhaseTrace::n_end).sum()
    }

    pub fn n_violations(&self) -> usize {
        self.phases.iter().flat_map(|p| p.violations.iter()).sum()
    }

    pub fn rows(&self) -> Vec<TrajectoryRow> {
        self.phases.iter().flat_map(PhaseTrace::rows).collect()
    }
}

/// Runs a fully assigned recipe from `x0`.
pub fn run_recipe(
    model: &ModelParameters,
    settings: &RecipeSettings,
    x0: PhysicalState,
    theta: &RecipeParameters,
) -> Result<RecipeRun> {
    let mut cur = BatchCursor::start(x0);
    let mut phases = Vec::with_capacity(N_PHASES);
    for z in 1..=N_PHASES {
        let (trace, next) = run_phase(model, settings, &cur, theta, z)?;
        phases.push(trace);
        cur = next;
    }
    Ok(RecipeRun { phases, end: cur })
}
