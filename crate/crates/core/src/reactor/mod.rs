//! Reactor plant: parameters, state types, dynamics and constraints.

mod initial;
pub mod integrator;
mod model;
mod params;
mod state;
mod trajectory;

pub use initial::sample_initial_state;
pub use model::{
    adiabatic_temperature, advance, check_constraints, conversion, rhs, step, ConstraintReport,
    Derivative, CONSTRAINT_NAMES, N_CONSTRAINTS,
};
pub use params::{
    ActuatorBox, ConstraintBounds, InitialRanges, ModelParameters, PlantConfig,
    DEFAULT_REACTOR_FILE,
};
pub use state::{
    ControlInput, PhysicalState, INPUT_NAMES, N_INPUTS, N_STATES, PLAUSIBLE_TEMP_MAX,
    PLAUSIBLE_TEMP_MIN, STATE_NAMES,
};
pub use trajectory::{
    read_violation_column, write_trajectory_csv, TrajectoryRow, RECIPE_COLUMNS, TRAJECTORY_HEADER,
};
