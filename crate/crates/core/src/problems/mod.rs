//! Benchmark problems behind one normalized-fitness interface.
//!
//! Every problem scores candidates in `[0, 1]`: regression as
//! `1 / (1 + mean absolute error)`, Boolean and classification tasks as
//! balanced accuracy, and the ant as the fraction of food eaten.

mod ant;
mod boolean;
mod dataset;
mod regression;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use ant::{ant_simulate, AntTrail, Heading, SANTA_FE_STEPS, SANTA_FE_TEXT};
pub use boolean::{multiplexer_dataset, parity_dataset};
pub use dataset::{bundled, load_csv_dataset, read_csv_dataset, Dataset, LabelColumn};
pub use regression::{quartic, quartic_dataset, PointSet};

use crate::error::{Error, Result};
use crate::evolve::{EvolveOptions, RunResult};
use crate::metrics::balanced_accuracy;
use crate::params::ParameterSet;
use crate::tree::{PrimitiveSet, ProgramTree};

/// Default success threshold for every problem.
pub const DEFAULT_THRESHOLD: f64 = 0.97;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Tree,
    Stack,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemKind {
    Regression(PointSet),
    Parity { bits: usize, data: Dataset },
    Multiplexer { addr_bits: usize, data: Dataset },
    Ant(AntTrail),
    Classification(Dataset),
}

/// A benchmark task. Immutable once built, so it can be shared freely
/// between concurrent runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub kind: ProblemKind,
    pub success_threshold: f64,
    pub engine: EngineKind,
}

/// What a candidate produced on a problem, before normalization.
#[derive(Clone, Debug, PartialEq)]
pub enum RawOutcome {
    MeanAbsError(f64),
    Predictions(Vec<usize>),
    FoodEaten(usize),
}

impl Problem {
    fn with_kind(name: String, kind: ProblemKind, engine: EngineKind) -> Self {
        Problem {
            name,
            kind,
            success_threshold: DEFAULT_THRESHOLD,
            engine,
        }
    }

    pub fn quartic(n_points: usize, lo: f64, hi: f64) -> Result<Self> {
        let points = quartic_dataset(n_points, lo, hi)?;
        Ok(Problem::with_kind("quartic".into(), ProblemKind::Regression(points), EngineKind::Tree))
    }

    pub fn parity(bits: usize) -> Result<Self> {
        let data = parity_dataset(bits)?;
        Ok(Problem::with_kind(
            format!("parity-{bits}"),
            ProblemKind::Parity { bits, data },
            EngineKind::Tree,
        ))
    }

    pub fn multiplexer(addr_bits: usize) -> Result<Self> {
        let data = multiplexer_dataset(addr_bits)?;
        Ok(Problem::with_kind(
            format!("mux-{}-{}", addr_bits, 1usize << addr_bits),
            ProblemKind::Multiplexer { addr_bits, data },
            EngineKind::Tree,
        ))
    }

    pub fn ant(trail: AntTrail) -> Self {
        Problem::with_kind("ant".into(), ProblemKind::Ant(trail), EngineKind::Tree)
    }

    pub fn santa_fe() -> Self {
        Problem::ant(AntTrail::santa_fe())
    }

    /// Classification data, solved by the stack engine.
    pub fn classification(data: Dataset) -> Self {
        Problem::with_kind(data.name.clone(), ProblemKind::Classification(data), EngineKind::Stack)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::config(format!("threshold {threshold} outside [0, 1]")));
        }
        self.success_threshold = threshold;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Switches engines. Only dataset-backed problems can run on the stack
    /// engine; only non-classification problems on the tree engine.
    pub fn with_engine(mut self, engine: EngineKind) -> Result<Self> {
        let ok = match engine {
            EngineKind::Stack => self.dataset().is_some(),
            EngineKind::Tree => !matches!(self.kind, ProblemKind::Classification(_)),
        };
        if !ok {
            return Err(Error::config(format!("problem `{}` cannot run on the {engine:?} engine", self.name)));
        }
        self.engine = engine;
        Ok(self)
    }

    /// The labelled data behind Boolean and classification problems.
    pub fn dataset(&self) -> Option<&Dataset> {
        match &self.kind {
            ProblemKind::Parity { data, .. }
            | ProblemKind::Multiplexer { data, .. }
            | ProblemKind::Classification(data) => Some(data),
            _ => None,
        }
    }

    /// Primitive set for the tree engine.
    pub fn primitive_set(&self) -> Option<PrimitiveSet> {
        match &self.kind {
            ProblemKind::Regression(_) => Some(PrimitiveSet::regression()),
            ProblemKind::Parity { bits, .. } => Some(PrimitiveSet::parity(*bits)),
            ProblemKind::Multiplexer { addr_bits, .. } => Some(PrimitiveSet::multiplexer(*addr_bits)),
            ProblemKind::Ant(_) => Some(PrimitiveSet::ant()),
            ProblemKind::Classification(_) => None,
        }
    }

    /// Runs a tree program on the problem.
    pub fn tree_outcome(&self, tree: &ProgramTree) -> Result<RawOutcome> {
        match &self.kind {
            ProblemKind::Regression(points) => {
                tree.check_value_tree(1)?;
                let total: f64 = points
                    .xs
                    .iter()
                    .zip(&points.ys)
                    .map(|(&x, &y)| (tree.evaluate_unchecked(&[x]) - y).abs())
                    .sum();
                Ok(RawOutcome::MeanAbsError(total / points.xs.len() as f64))
            }
            ProblemKind::Parity { data, .. } | ProblemKind::Multiplexer { data, .. } => {
                tree.check_value_tree(data.n_features())?;
                let on = data.class_index("1").expect("boolean dataset has class 1");
                let off = data.class_index("0").expect("boolean dataset has class 0");
                let predicted = data
                    .features
                    .iter()
                    .map(|row| if tree.evaluate_unchecked(row) != 0.0 { on } else { off })
                    .collect();
                Ok(RawOutcome::Predictions(predicted))
            }
            ProblemKind::Ant(trail) => Ok(RawOutcome::FoodEaten(ant_simulate(tree, trail)?)),
            ProblemKind::Classification(_) => Err(Error::config(format!(
                "problem `{}` is a classification task for the stack engine",
                self.name
            ))),
        }
    }

    /// Maps a raw outcome onto `[0, 1]`; higher is better.
    pub fn normalized_fitness(&self, raw: &RawOutcome) -> f64 {
        match raw {
            RawOutcome::MeanAbsError(mae) => {
                if mae.is_finite() && *mae >= 0.0 {
                    1.0 / (1.0 + mae)
                } else {
                    0.0
                }
            }
            RawOutcome::Predictions(pred) => {
                let truth = &self.dataset().expect("predictions need a dataset").labels;
                balanced_accuracy(pred, truth).unwrap_or(0.0)
            }
            RawOutcome::FoodEaten(eaten) => match &self.kind {
                ProblemKind::Ant(trail) if trail.food_total > 0 => {
                    (*eaten as f64 / trail.food_total as f64).min(1.0)
                }
                ProblemKind::Ant(_) => 1.0,
                _ => 0.0,
            },
        }
    }

    pub fn tree_fitness(&self, tree: &ProgramTree) -> Result<f64> {
        Ok(self.normalized_fitness(&self.tree_outcome(tree)?))
    }

    /// One GP run on this problem with whichever engine it is bound to.
    pub fn run(&self, params: &ParameterSet, seed: u64, opts: EvolveOptions) -> Result<RunResult> {
        match self.engine {
            EngineKind::Tree => crate::tree::run_evolution_with(self, params, seed, opts),
            EngineKind::Stack => {
                let data = self
                    .dataset()
                    .ok_or_else(|| Error::config(format!("problem `{}` has no dataset", self.name)))?;
                crate::stack::run_evolution_stack_with(data, params, seed, &Default::default(), opts)
            }
        }
    }
}

/// Serializable description of a problem, as written in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSource {
    Quartic {
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
    },
    Parity {
        bits: usize,
    },
    Multiplexer {
        addr_bits: usize,
    },
    Ant {
        #[serde(default)]
        trail: Option<PathBuf>,
        #[serde(default)]
        steps: Option<usize>,
    },
    /// A dataset shipped with the crate (`mux6`, `parity5`).
    Bundled {
        dataset: String,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        label: LabelColumn,
    },
}

fn default_points() -> usize {
    20
}
fn default_lo() -> f64 {
    -1.0
}
fn default_hi() -> f64 {
    1.0
}

/// A problem source plus optional overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(flatten)]
    pub source: ProblemSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineKind>,
}

impl ProblemSpec {
    pub fn new(source: ProblemSource) -> Self {
        ProblemSpec {
            source,
            name: None,
            threshold: None,
            engine: None,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        let mut p = match &self.source {
            ProblemSource::Quartic { points, lo, hi } => Problem::quartic(*points, *lo, *hi)?,
            ProblemSource::Parity { bits } => Problem::parity(*bits)?,
            ProblemSource::Multiplexer { addr_bits } => Problem::multiplexer(*addr_bits)?,
            ProblemSource::Ant { trail, steps } => {
                let steps = steps.unwrap_or(SANTA_FE_STEPS);
                let trail = match trail {
                    Some(path) => AntTrail::parse(&std::fs::read_to_string(path)?, steps)?,
                    None => AntTrail::parse(SANTA_FE_TEXT, steps)?,
                };
                Problem::ant(trail)
            }
            ProblemSource::Bundled { dataset } => Problem::classification(
                bundled::by_name(dataset)
                    .ok_or_else(|| Error::config(format!("no bundled dataset `{dataset}`")))?,
            ),
            ProblemSource::Csv { path, label } => Problem::classification(load_csv_dataset(path, label)?),
        };
        if let Some(name) = &self.name {
            p = p.with_name(name.clone());
        }
        if let Some(t) = self.threshold {
            p = p.with_threshold(t)?;
        }
        if let Some(e) = self.engine {
            p = p.with_engine(e)?;
        }
        Ok(p)
    }
}
