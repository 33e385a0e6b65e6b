//! Experiment driver for `saddle-core`: configuration, the staged pipeline,
//! parameter sweeps and report writers.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, StabilityMode, Stage};
pub use pipeline::{run_pipeline, worker_count, Outcome, PipelineError};
pub use sweep::{run_sweep, SweepSummary, Variation};
