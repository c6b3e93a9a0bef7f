//! Seeded experiments: far-input generation, trial aggregation with Wilson
//! intervals, JSONL/CSV/SVG output and the `lattest` command line.

pub mod cli;
mod config;
mod experiment;
mod far;
mod plot;
mod rng;
mod stats;

pub use config::{ExperimentConfig, Grid, InputKind, LatticeSpec, TesterKind};
pub use experiment::{
    run_experiment, write_outputs, CellParams, TrialAggregate, TrialRecord, CSV_HEADER,
};
pub use far::{generate_far_input, generate_far_span_input, FarInput};
pub use plot::{emit_plots, render_svg};
pub use rng::{cell_seed, rng_from_seed, splitmix64, trial_seed, TrialRng};
pub use stats::{wilson_interval, WILSON_Z_99};
