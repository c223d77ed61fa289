//! The generational loop shared by the tree and stack engines.
//!
//! Each generation draws `pop_size` parents by tournament, applies crossover
//! to consecutive pairs with probability `crossover_rate`, then mutation to
//! each offspring with probability `mutation_rate`. Only offspring changed by
//! variation are re-evaluated, so the evaluation count never exceeds
//! `pop_size * (generations + 1)`. There is no elitism; the best-ever
//! individual is tracked on the side.

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::ParameterSet;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::selection::tournament_index;

/// A genotype encoding plus its variation operators and fitness.
pub trait Representation: Sync {
    type Genotype: Clone + Send + Sync;

    /// One generation-zero individual.
    fn random_individual(&self, rng: &mut Rng) -> Self::Genotype;

    fn crossover(
        &self,
        a: &Self::Genotype,
        b: &Self::Genotype,
        rng: &mut Rng,
    ) -> (Self::Genotype, Self::Genotype);

    fn mutate(&self, a: &Self::Genotype, rng: &mut Rng) -> Self::Genotype;

    /// Normalized fitness in `[0, 1]`.
    fn fitness(&self, g: &Self::Genotype) -> Result<f64>;

    fn serialize(&self, g: &Self::Genotype) -> String;

    /// Structural invariants; checked with `debug_assert!` every generation.
    fn is_valid(&self, g: &Self::Genotype) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveOptions {
    /// Evaluate a generation's individuals on the rayon pool. Results are
    /// merged in index order, so output is identical either way.
    pub parallel_eval: bool,
    /// End the run once a perfect (1.0) individual exists. The best-ever
    /// fitness cannot improve past that point.
    pub stop_on_perfect: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            parallel_eval: false,
            stop_on_perfect: true,
        }
    }
}

/// Outcome of one full run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_fitness: f64,
    pub best_genotype: String,
    pub evaluations: u64,
    pub seed: u64,
    pub generations_run: u32,
    /// Best-ever fitness after each generation, starting with generation 0.
    pub best_per_generation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout_fitness: Option<f64>,
    /// Wall-clock seconds. Not serialized, so that serialized results of
    /// identical runs are byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run result serializes")
    }
}

/// Endless stream of generation-zero individuals, drawn exactly as the
/// engine draws its initial population.
pub struct GenerationZero<'a, R: Representation> {
    repr: &'a R,
    rng: Rng,
}

impl<'a, R: Representation> GenerationZero<'a, R> {
    pub fn new(repr: &'a R, seed: u64) -> Self {
        GenerationZero {
            repr,
            rng: rng_from_seed(seed),
        }
    }
}

impl<R: Representation> Iterator for GenerationZero<'_, R> {
    type Item = R::Genotype;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.repr.random_individual(&mut self.rng))
    }
}

/// The initial population of a run seeded with `seed`.
pub fn initial_population<R: Representation>(repr: &R, size: usize, seed: u64) -> Vec<R::Genotype> {
    GenerationZero::new(repr, seed).take(size).collect()
}

struct Individual<G> {
    genotype: G,
    fitness: Option<f64>,
}

fn evaluate_pending<R: Representation>(
    repr: &R,
    pop: &mut [Individual<R::Genotype>],
    parallel: bool,
) -> Result<u64> {
    let pending: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].fitness.is_none()).collect();
    let scores: Vec<Result<f64>> = if parallel {
        pending
            .par_iter()
            .map(|&i| repr.fitness(&pop[i].genotype))
            .collect()
    } else {
        pending.iter().map(|&i| repr.fitness(&pop[i].genotype)).collect()
    };
    for (&i, score) in pending.iter().zip(scores) {
        pop[i].fitness = Some(score?);
    }
    Ok(pending.len() as u64)
}

/// Runs one generational GP run. Deterministic in `(repr, params, seed)`.
pub fn evolve<R: Representation>(
    repr: &R,
    params: &ParameterSet,
    seed: u64,
    opts: EvolveOptions,
) -> Result<(RunResult, R::Genotype)> {
    params.validate()?;
    let started = Instant::now();
    let n = params.pop_size as usize;
    let k = params.tournament_size as usize;

    let mut pop: Vec<Individual<R::Genotype>> = GenerationZero::new(repr, seed)
        .take(n)
        .map(|genotype| Individual { genotype, fitness: None })
        .collect();
    // Variation draws from its own stream so it never replays generation zero.
    let mut rng = rng_from_seed(derive_seed(seed, 1));

    let mut evaluations = evaluate_pending(repr, &mut pop, opts.parallel_eval)?;
    let mut best_idx = 0;
    for i in 1..n {
        if pop[i].fitness > pop[best_idx].fitness {
            best_idx = i;
        }
    }
    let mut best = pop[best_idx].genotype.clone();
    let mut best_fitness = pop[best_idx].fitness.unwrap_or(0.0);
    let mut trace = vec![best_fitness];
    let mut generations_run = 0;

    for _gen in 1..=params.generations {
        if opts.stop_on_perfect && best_fitness >= 1.0 {
            break;
        }
        let fits: Vec<f64> = pop.iter().map(|ind| ind.fitness.unwrap_or(0.0)).collect();
        let mut offspring: Vec<Individual<R::Genotype>> = Vec::with_capacity(n);
        for _ in 0..n {
            let i = tournament_index(&fits, k, &mut rng)?;
            offspring.push(Individual {
                genotype: pop[i].genotype.clone(),
                fitness: pop[i].fitness,
            });
        }
        for i in (1..n).step_by(2) {
            if rng.gen::<f64>() < params.crossover_rate {
                let (c1, c2) = repr.crossover(&offspring[i - 1].genotype, &offspring[i].genotype, &mut rng);
                offspring[i - 1] = Individual { genotype: c1, fitness: None };
                offspring[i] = Individual { genotype: c2, fitness: None };
            }
        }
        for ind in offspring.iter_mut() {
            if rng.gen::<f64>() < params.mutation_rate {
                ind.genotype = repr.mutate(&ind.genotype, &mut rng);
                ind.fitness = None;
            }
        }
        debug_assert!(offspring.iter().all(|ind| repr.is_valid(&ind.genotype)));

        evaluations += evaluate_pending(repr, &mut offspring, opts.parallel_eval)?;
        pop = offspring;
        for ind in &pop {
            let f = ind.fitness.unwrap_or(0.0);
            if f > best_fitness {
                best_fitness = f;
                best = ind.genotype.clone();
            }
        }
        trace.push(best_fitness);
        generations_run += 1;
    }

    let result = RunResult {
        best_fitness,
        best_genotype: repr.serialize(&best),
        evaluations,
        seed,
        generations_run,
        best_per_generation: trace,
        holdout_fitness: None,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok((result, best))
}
