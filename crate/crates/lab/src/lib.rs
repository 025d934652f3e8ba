//! Experiment harness for `lqg-core`: configuration, a field cache,
//! ensemble runs and their result files.

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod record;
pub mod regions;

pub use cache::{FieldCache, GffSampler};
pub use config::{ExperimentConfig, ExperimentKind, FieldSource};
pub use error::LabError;
pub use experiments::{run_experiment, summarize};
pub use record::{emit_plot_data, ResultRecord, Table};
