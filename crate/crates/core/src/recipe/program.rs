//! Structure of the three-phase polymerization recipe.

use serde::{Deserialize, Serialize};

pub const N_PARAMS: usize = 14;
pub const N_PHASES: usize = 3;

/// Final step of each phase (1-based).
pub const PHASE_FINAL_STEPS: [usize; N_PHASES] = [5, 11, 14];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Set,
    Condition,
}

/// What a recipe parameter controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepTarget {
    FeedSlope,
    ReactorSetpoint,
    OuterKp,
    OuterKi,
    MassThreshold,
    FeedCap,
    PhaseTimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecipeStep {
    pub c: usize,
    pub phase: usize,
    pub kind: StepKind,
    pub target: StepTarget,
    pub description: &'static str,
}

use StepKind::*;
use StepTarget::*;

pub const STEPS: [RecipeStep; N_PARAMS] = [
    RecipeStep { c: 1, phase: 1, kind: Set, target: FeedSlope, description: "set slope of feed ramp" },
    RecipeStep { c: 2, phase: 1, kind: Set, target: ReactorSetpoint, description: "set T_R setpoint of outer PID" },
    RecipeStep { c: 3, phase: 1, kind: Set, target: OuterKp, description: "set K_P of outer PID" },
    RecipeStep { c: 4, phase: 1, kind: Set, target: OuterKi, description: "set K_I of outer PID" },
    RecipeStep { c: 5, phase: 1, kind: Condition, target: MassThreshold, description: "run phase 1 until total mass reaches threshold" },
    RecipeStep { c: 6, phase: 2, kind: Set, target: FeedSlope, description: "set slope of feed ramp" },
    RecipeStep { c: 7, phase: 2, kind: Set, target: ReactorSetpoint, description: "set T_R setpoint of outer PID" },
    RecipeStep { c: 8, phase: 2, kind: Set, target: OuterKp, description: "set K_P of outer PID" },
    RecipeStep { c: 9, phase: 2, kind: Set, target: OuterKi, description: "set K_I of outer PID" },
    RecipeStep { c: 10, phase: 2, kind: Set, target: FeedCap, description: "set maximal feed" },
    RecipeStep { c: 11, phase: 2, kind: Condition, target: PhaseTimeLimit, description: "run phase 2 until time limit or feed cap" },
    RecipeStep { c: 12, phase: 3, kind: Set, target: ReactorSetpoint, description: "hold feed until delivered, then close; set T_R setpoint" },
    RecipeStep { c: 13, phase: 3, kind: Set, target: OuterKp, description: "set K_P of outer PID" },
    RecipeStep { c: 14, phase: 3, kind: Set, target: OuterKi, description: "set K_I of outer PID" },
];

/// Phase that step `c` (1-based) belongs to.
pub fn phase_of(c: usize) -> usize {
    STEPS[c - 1].phase
}

/// True when setting `c` completes its phase.
pub fn is_phase_final(c: usize) -> bool {
    PHASE_FINAL_STEPS.contains(&c)
}

/// Parameter indices (1-based) of a phase's `(setpoint, K_P, K_I)`.
pub fn controller_steps(phase: usize) -> (usize, usize, usize) {
    match phase {
        1 => (2, 3, 4),
        2 => (7, 8, 9),
        3 => (12, 13, 14),
        _ => panic!("phase {phase} out of range"),
    }
}
