//! Command-line front end for the design pipeline.

pub mod commands;
pub mod config;
pub mod pipeline;

pub use commands::{run, Cli};
pub use config::{GroupSource, PipelineConfig, Preset};
pub use pipeline::{run_pipeline, PipelineError, RunManifest};
