//! Genetic programming engines, benchmark problems and hyper-parameter
//! tuners for probing how much of an evolutionary algorithm's parameter
//! space yields successful runs.
//!
//! * [`tree`] and [`stack`] are the two GP engines; both run the generational
//!   loop in [`evolve`].
//! * [`problems`] holds the benchmark suite and CSV ingestion.
//! * [`meta`] is a genetic algorithm over [`ParameterSet`]s, and
//!   [`random_search`] samples them at random.
//! * [`harness`] persists campaign records, summarizes them, and draws plots.

pub mod error;
pub mod evolve;
pub mod harness;
pub mod meta;
pub mod metrics;
pub mod params;
pub mod problems;
pub mod random_search;
pub mod rng;
pub mod selection;
pub mod stack;
pub mod tree;

pub use error::{Error, Result};
pub use evolve::{EvolveOptions, RunResult};
pub use metrics::{aggregate_fitness, balanced_accuracy, evaluate_success, SuccessCriterion};
pub use params::{Gene, Interval, ParameterRanges, ParameterSet};
pub use problems::{Dataset, EngineKind, Problem};
