//! Parameterized operation recipe: three phases, fourteen parameters.

mod params;
pub mod program;
mod run;

pub use params::{
    apply_set_step, baseline_recipe, BatchSettings, RecipeParameters, RecipeSettings,
    DEFAULT_RECIPE_FILE,
};
pub use program::{is_phase_final, phase_of, N_PARAMS, N_PHASES, PHASE_FINAL_STEPS};
pub use run::{
    phase_cascade, run_phase, run_recipe, BatchCursor, ExitReason, PhaseTrace, RecipeRun,
};
pub(crate) use run::limit_to_remaining;
