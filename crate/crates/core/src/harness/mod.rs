//! Experiment configuration, result files, summaries and plots.

pub mod config;
pub mod plot;
pub mod records;
pub mod run;
pub mod summary;

pub use config::{BaselineConfig, ExperimentConfig, Mode};
pub use plot::{emit_plots, PLOT_KINDS};
pub use records::{read_records, Record, RecordFile};
pub use run::{run_experiment, ExperimentOutcome, RunOptions};
pub use summary::{summarize, SummaryReport};
