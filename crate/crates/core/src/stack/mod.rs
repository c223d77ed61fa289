//! Stack-based GP for classification: each linear program maps a sample to
//! a short output vector, and samples are labelled by the nearest class
//! centroid in that output space.

mod centroid;
mod program;

pub use centroid::{classify, fit_centroids, CentroidModel};
pub use program::{
    execute_stack, linear_crossover, point_mutate, random_instruction, random_program, Instruction,
    StackProgram, INIT_LEN, MAX_LEN,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{evolve, EvolveOptions, Representation, RunResult};
use crate::metrics::balanced_accuracy;
use crate::params::ParameterSet;
use crate::problems::Dataset;
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Cap on the program output dimension.
pub const MAX_OUTPUT_DIM: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    /// Fraction of each class held out for reporting. When unset, fitness is
    /// computed on the whole dataset.
    #[serde(default)]
    pub holdout_fraction: Option<f64>,
}

/// Output dimension for a dataset: the class count, capped at
/// [`MAX_OUTPUT_DIM`].
pub fn output_dim(data: &Dataset) -> usize {
    data.n_classes().min(MAX_OUTPUT_DIM)
}

/// Balanced accuracy of `program` on `test` after fitting centroids on `train`.
pub fn score_program(program: &StackProgram, train: &Dataset, test: &Dataset) -> Result<f64> {
    let dim = output_dim(train);
    let train_out: Vec<Vec<f64>> = train.features.iter().map(|r| execute_stack(program, r, dim)).collect();
    let model = fit_centroids(&train_out, &train.labels, train.n_classes())?;
    let predictions: Vec<usize> = if std::ptr::eq(train, test) {
        train_out.iter().map(|o| classify(&model, o)).collect()
    } else {
        test.features
            .iter()
            .map(|r| classify(&model, &execute_stack(program, r, dim)))
            .collect()
    };
    balanced_accuracy(&predictions, &test.labels)
}

pub struct StackRepresentation<'a> {
    data: &'a Dataset,
}

impl<'a> StackRepresentation<'a> {
    pub fn new(data: &'a Dataset) -> Result<Self> {
        if data.n_classes() < 2 {
            return Err(Error::config(format!("dataset `{}` has a single class", data.name)));
        }
        Ok(StackRepresentation { data })
    }
}

impl Representation for StackRepresentation<'_> {
    type Genotype = StackProgram;

    fn random_individual(&self, rng: &mut Rng) -> StackProgram {
        random_program(self.data.n_features(), rng)
    }

    fn crossover(&self, a: &StackProgram, b: &StackProgram, rng: &mut Rng) -> (StackProgram, StackProgram) {
        linear_crossover(a, b, rng)
    }

    fn mutate(&self, a: &StackProgram, rng: &mut Rng) -> StackProgram {
        point_mutate(a, self.data.n_features(), rng)
    }

    fn fitness(&self, g: &StackProgram) -> Result<f64> {
        score_program(g, self.data, self.data)
    }

    fn serialize(&self, g: &StackProgram) -> String {
        g.to_string()
    }

    fn is_valid(&self, g: &StackProgram) -> bool {
        g.is_valid(self.data.n_features())
    }
}

/// Stratified split: from each class, `fraction` of its rows (rounded, but
/// leaving at least one in training) go to the holdout set.
pub fn stratified_split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0 < fraction && fraction < 1.0) {
        return Err(Error::config(format!("holdout fraction {fraction} outside (0, 1)")));
    }
    let mut rng = rng_from_seed(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..data.n_classes() {
        let mut rows: Vec<usize> = (0..data.n_samples()).filter(|&i| data.labels[i] == class).collect();
        rows.shuffle(&mut rng);
        let held = ((rows.len() as f64 * fraction).round() as usize).min(rows.len().saturating_sub(1));
        test.extend_from_slice(&rows[..held]);
        train.extend_from_slice(&rows[held..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if test.is_empty() {
        return Err(Error::config("holdout split left no test rows"));
    }
    Ok((data.subset(&train), data.subset(&test)))
}

/// One stack-GP run with default options.
pub fn run_evolution_stack(data: &Dataset, params: &ParameterSet, seed: u64) -> Result<RunResult> {
    run_evolution_stack_with(data, params, seed, &StackConfig::default(), EvolveOptions::default())
}

pub fn run_evolution_stack_with(
    data: &Dataset,
    params: &ParameterSet,
    seed: u64,
    config: &StackConfig,
    opts: EvolveOptions,
) -> Result<RunResult> {
    match config.holdout_fraction {
        None => {
            let repr = StackRepresentation::new(data)?;
            evolve(&repr, params, seed, opts).map(|(r, _)| r)
        }
        Some(fraction) => {
            let (train, test) = stratified_split(data, fraction, derive_seed(seed, 2))?;
            let repr = StackRepresentation::new(&train)?;
            let (mut result, best) = evolve(&repr, params, seed, opts)?;
            result.holdout_fitness = Some(score_program(&best, &train, &test)?);
            Ok(result)
        }
    }
}
