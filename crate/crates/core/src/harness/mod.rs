//! Evaluation, training run directories and the hyperparameter grid.

mod eval;
mod grid;
mod run;

pub use eval::{evaluate, BaselinePolicy, EpisodeRecord, EvalMetrics, EvalReport, Policy, EVAL_SEED_BASE};
pub use grid::{rank_results, run_grid, GridCell, GridConfig, GridOutcome, GridResult, GridSpec, RESULTS_HEADER};
pub use run::{train_run, write_json, Algorithm, TrainConfig, TrainSnapshot, TrainSummary};
