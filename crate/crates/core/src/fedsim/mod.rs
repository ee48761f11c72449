//! Synchronous federation simulator: client sampling, noise wiring, metric
//! collection, step-size grid search and seed repetition.

mod config;
mod grid;
mod presets;
mod run;

pub use config::{EvalPoint, OutputSequence, ProblemSpec, SimConfig};
pub use grid::{
    aggregate, grid_search, grid_search_with, mean_std, repeat_seeds, repeat_seeds_with, select_best, AggregateRecord,
    GridCell, GridResult, SeedSummary, DEFAULT_ETA_C_GRID, DEFAULT_ETA_C_GRID_NUCLEAR, DEFAULT_ETA_S_GRID,
};
pub use presets::{preset, PRESET_NAMES};
pub use run::{
    run_experiment, run_experiment_in, sample_clients, simulate, worker_pool, RunOutcome, RunRecord, DIVERGENCE_GAP,
    THREADS_ENV,
};
