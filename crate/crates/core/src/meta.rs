//! Meta-genetic algorithm over parameter sets.
//!
//! A genome is the five-gene [`ParameterSet`]. Its fitness is the weighted
//! mean of the best fitness reached by one full GP run per problem. Problem
//! weights adapt every `weight_update_period` generations: problems whose
//! mean fitness over the window was below the cross-problem mean gain
//! weight, those above lose it.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EvolveOptions;
use crate::metrics::{aggregate_fitness, uniform_weights};
use crate::params::{Gene, ParameterRanges, ParameterSet};
use crate::problems::Problem;
use crate::rng::{derive_seed, derive_seed_from, rng_from_seed, Rng};
use crate::selection::tournament_index;

pub type ParameterGenome = ParameterSet;

/// Multiplier applied to the weight of a below-mean problem.
pub const WEIGHT_UP: f64 = 1.1;
/// Multiplier applied to the weight of an above-mean problem.
pub const WEIGHT_DOWN: f64 = 0.9;
/// No weight may fall below this.
pub const WEIGHT_FLOOR: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaConfig {
    pub meta_pop_size: usize,
    pub meta_generations: usize,
    pub meta_tournament: usize,
    pub p_xo: f64,
    pub p_m: f64,
    pub elitism_fraction: f64,
    pub weight_update_period: usize,
    /// Ranges genes are initialized and mutated within.
    pub gene_ranges: ParameterRanges,
    pub evolve: EvolveOptions,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig {
            meta_pop_size: 200,
            meta_generations: 105,
            meta_tournament: 3,
            p_xo: 0.5,
            p_m: 0.2,
            elitism_fraction: 0.02,
            weight_update_period: 3,
            gene_ranges: ParameterRanges::WIDEST,
            evolve: EvolveOptions::default(),
        }
    }
}

impl MetaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.meta_pop_size < 2 {
            return bad(format!("meta_pop_size {} < 2", self.meta_pop_size));
        }
        if self.meta_generations < 1 {
            return bad("meta_generations must be at least 1".into());
        }
        if self.meta_tournament < 1 || self.meta_tournament > self.meta_pop_size {
            return bad(format!("meta_tournament {} outside [1, pop]", self.meta_tournament));
        }
        for (name, p) in [("p_xo", self.p_xo), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&self.elitism_fraction) {
            return bad(format!("elitism_fraction {} outside [0, 1)", self.elitism_fraction));
        }
        if !(1..=5).contains(&self.weight_update_period) {
            return bad(format!("weight_update_period {} outside [1, 5]", self.weight_update_period));
        }
        self.gene_ranges.validate()
    }

    /// `ceil(elitism_fraction * meta_pop_size)`.
    pub fn elite_count(&self) -> usize {
        ((self.elitism_fraction * self.meta_pop_size as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Problem weights: non-negative, at least [`WEIGHT_FLOOR`], summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub BTreeMap<String, f64>);

impl WeightVector {
    pub fn uniform<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        WeightVector(uniform_weights(names))
    }

    pub fn is_valid(&self) -> bool {
        let sum: f64 = self.0.values().sum();
        !self.0.is_empty() && (sum - 1.0).abs() <= 1e-9 && self.0.values().all(|&w| w >= WEIGHT_FLOOR - 1e-12)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

/// Rescales `raw` to sum to 1 with every entry at least `floor`. Entries that
/// would fall under the floor are pinned to it and the rest share what is left.
fn project_with_floor(raw: &BTreeMap<String, f64>, floor: f64) -> BTreeMap<String, f64> {
    let mut pinned: Vec<&String> = Vec::new();
    loop {
        let free_mass: f64 = raw.iter().filter(|(k, _)| !pinned.contains(k)).map(|(_, v)| v).sum();
        let budget = 1.0 - floor * pinned.len() as f64;
        let scale = if free_mass > 0.0 { budget / free_mass } else { 0.0 };
        let newly: Vec<&String> = raw
            .iter()
            .filter(|(k, v)| !pinned.contains(k) && *v * scale < floor)
            .map(|(k, _)| k)
            .collect();
        if newly.is_empty() {
            return raw
                .iter()
                .map(|(k, &v)| (k.clone(), if pinned.contains(&k) { floor } else { v * scale }))
                .collect();
        }
        pinned.extend(newly);
    }
}

/// Raises the weights of problems below the cross-problem mean fitness by
/// [`WEIGHT_UP`], lowers those above by [`WEIGHT_DOWN`], then enforces the
/// floor and renormalizes.
pub fn update_weights(current: &WeightVector, per_problem_mean_fitness: &BTreeMap<String, f64>) -> Result<WeightVector> {
    if current.0.keys().any(|k| !per_problem_mean_fitness.contains_key(k)) {
        return Err(Error::Metrics("fitness map does not cover every weighted problem".into()));
    }
    let n = current.0.len() as f64;
    let mean: f64 = current.0.keys().map(|k| per_problem_mean_fitness[k]).sum::<f64>() / n;
    let mut changed = false;
    let raw: BTreeMap<String, f64> = current
        .0
        .iter()
        .map(|(k, &w)| {
            let f = per_problem_mean_fitness[k];
            let factor = if (f - mean).abs() <= 1e-12 {
                1.0
            } else if f < mean {
                WEIGHT_UP
            } else {
                WEIGHT_DOWN
            };
            changed |= factor != 1.0;
            (k.clone(), w * factor)
        })
        .collect();
    if !changed && current.is_valid() {
        return Ok(current.clone());
    }
    Ok(WeightVector(project_with_floor(&raw, WEIGHT_FLOOR)))
}

/// Two-point crossover at parameter boundaries `i < j` (each in `1..=4`):
/// genes at positions `i..j` are exchanged.
pub fn meta_crossover_at(a: &ParameterGenome, b: &ParameterGenome, i: usize, j: usize) -> (ParameterGenome, ParameterGenome) {
    assert!(1 <= i && i < j && j <= 4, "boundaries must satisfy 1 <= i < j <= 4");
    let mut c1 = *a;
    let mut c2 = *b;
    for gene in &Gene::ALL[i..j] {
        c1.copy_gene_from(b, *gene);
        c2.copy_gene_from(a, *gene);
    }
    (c1, c2)
}

/// Picks two of the four internal boundaries uniformly and exchanges the
/// genes between them.
pub fn meta_crossover(a: &ParameterGenome, b: &ParameterGenome, rng: &mut Rng) -> (ParameterGenome, ParameterGenome) {
    let picked = sample(rng, 4, 2);
    let (x, y) = (picked.index(0) + 1, picked.index(1) + 1);
    meta_crossover_at(a, b, x.min(y), x.max(y))
}

/// Resamples one uniformly chosen gene over its full range; returns the
/// child and the gene that changed.
pub fn meta_mutate_with_gene(a: &ParameterGenome, ranges: &ParameterRanges, rng: &mut Rng) -> (ParameterGenome, Gene) {
    let gene = Gene::ALL[rng.gen_range(0..Gene::ALL.len())];
    let mut child = *a;
    child.set_gene(gene, ranges.sample_gene(gene, rng));
    (child, gene)
}

pub fn meta_mutate(a: &ParameterGenome, ranges: &ParameterRanges, rng: &mut Rng) -> ParameterGenome {
    meta_mutate_with_gene(a, ranges, rng).0
}

/// Per-problem outcome of evaluating one genome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaEvaluation {
    pub per_problem: BTreeMap<String, f64>,
    pub fitness: f64,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn combine(per_problem: BTreeMap<String, f64>, error: Option<String>, weights: &WeightVector) -> Result<MetaEvaluation> {
    Ok(match error {
        None => MetaEvaluation {
            fitness: aggregate_fitness(&per_problem, &weights.0)?,
            per_problem,
            valid: true,
            error: None,
        },
        Some(e) => MetaEvaluation {
            per_problem,
            fitness: 0.0,
            valid: false,
            error: Some(e),
        },
    })
}

/// Runs one GP run per problem (problem `i` uses `seeds[i]`) and returns the
/// weighted mean of their best fitnesses. A failing run marks the record
/// invalid with fitness 0.
pub fn evaluate_meta_fitness(
    genome: &ParameterGenome,
    problems: &[Problem],
    weights: &WeightVector,
    seeds: &[u64],
    opts: EvolveOptions,
) -> Result<MetaEvaluation> {
    if seeds.len() != problems.len() {
        return Err(Error::config(format!("{} seeds for {} problems", seeds.len(), problems.len())));
    }
    let mut per_problem = BTreeMap::new();
    let mut error = None;
    for (p, &seed) in problems.iter().zip(seeds) {
        match p.run(genome, seed, opts) {
            Ok(r) => {
                per_problem.insert(p.name.clone(), r.best_fitness);
            }
            Err(e) => {
                error.get_or_insert_with(|| format!("{}: {e}", p.name));
                per_problem.insert(p.name.clone(), 0.0);
            }
        }
    }
    combine(per_problem, error, weights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredGenome {
    pub genome: ParameterGenome,
    #[serde(flatten)]
    pub evaluation: MetaEvaluation,
}

/// State of the meta-GA after one generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaGeneration {
    pub generation: usize,
    /// Best genome observed so far.
    pub best_genome: ParameterGenome,
    /// Best meta-fitness observed so far (non-decreasing).
    pub best_fitness: f64,
    pub generation_best_fitness: f64,
    /// Weights used to score this generation.
    pub weights: WeightVector,
    pub population: Vec<ScoredGenome>,
}

type RunCache = HashMap<([u64; 5], usize), std::result::Result<f64, String>>;

/// Stepwise meta-GA. Each generation draws from its own derived generator,
/// so a run can be resumed from its recorded history.
pub struct MetaGa<'a> {
    problems: &'a [Problem],
    config: MetaConfig,
    seed: u64,
    weights: WeightVector,
    population: Vec<ScoredGenome>,
    window: Vec<BTreeMap<String, f64>>,
    best: Option<(ParameterGenome, f64)>,
    next_generation: usize,
    cache: RunCache,
}

impl<'a> MetaGa<'a> {
    pub fn new(problems: &'a [Problem], config: MetaConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if problems.is_empty() {
            return Err(Error::config("meta-GA needs at least one problem"));
        }
        let mut names: Vec<&str> = problems.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != problems.len() {
            return Err(Error::config("problem names must be unique"));
        }
        if problems.len() as f64 * WEIGHT_FLOOR > 1.0 {
            return Err(Error::config("too many problems for the weight floor"));
        }
        Ok(MetaGa {
            problems,
            weights: WeightVector::uniform(problems.iter().map(|p| p.name.as_str())),
            config,
            seed,
            population: Vec::new(),
            window: Vec::new(),
            best: None,
            next_generation: 0,
            cache: HashMap::new(),
        })
    }

    /// Rebuilds the state reached after `history` (generations `0..n`).
    pub fn resume(problems: &'a [Problem], config: MetaConfig, seed: u64, history: &[MetaGeneration]) -> Result<Self> {
        let mut ga = MetaGa::new(problems, config, seed)?;
        for (i, record) in history.iter().enumerate() {
            if record.generation != i {
                return Err(Error::config(format!("history gap at generation {i}")));
            }
            ga.weights = record.weights.clone();
            ga.population = record.population.clone();
            ga.best = Some((record.best_genome, record.best_fitness));
            ga.next_generation = i + 1;
            ga.finish_generation(i)?;
        }
        Ok(ga)
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn is_done(&self) -> bool {
        self.next_generation > self.config.meta_generations
    }

    pub fn genome_seed(&self, genome: &ParameterGenome, problem_index: usize) -> u64 {
        let k = genome.key();
        derive_seed_from(self.seed, &[k[0], k[1], k[2], k[3], k[4], problem_index as u64])
    }

    fn breed(&self, rng: &mut Rng) -> Result<Vec<ParameterGenome>> {
        let n = self.config.meta_pop_size;
        let n_elite = self.config.elite_count().min(n);
        let mut order: Vec<usize> = (0..self.population.len()).collect();
        order.sort_by(|&a, &b| {
            self.population[b]
                .evaluation
                .fitness
                .total_cmp(&self.population[a].evaluation.fitness)
                .then(a.cmp(&b))
        });
        let mut next: Vec<ParameterGenome> = order[..n_elite].iter().map(|&i| self.population[i].genome).collect();

        let fits: Vec<f64> = self.population.iter().map(|s| s.evaluation.fitness).collect();
        let mut offspring = Vec::with_capacity(n - n_elite);
        for _ in 0..n - n_elite {
            offspring.push(self.population[tournament_index(&fits, self.config.meta_tournament, rng)?].genome);
        }
        for i in (1..offspring.len()).step_by(2) {
            if rng.gen::<f64>() < self.config.p_xo {
                let (c1, c2) = meta_crossover(&offspring[i - 1], &offspring[i], rng);
                offspring[i - 1] = c1;
                offspring[i] = c2;
            }
        }
        for g in offspring.iter_mut() {
            if rng.gen::<f64>() < self.config.p_m {
                *g = meta_mutate(g, &self.config.gene_ranges, rng);
            }
        }
        next.extend(offspring);
        Ok(next)
    }

    fn evaluate(&mut self, genomes: &[ParameterGenome]) -> Result<Vec<ScoredGenome>> {
        let mut jobs: Vec<(ParameterGenome, usize, u64)> = Vec::new();
        for g in genomes {
            for p in 0..self.problems.len() {
                let key = (g.key(), p);
                if !self.cache.contains_key(&key) && !jobs.iter().any(|(j, q, _)| j.key() == key.0 && *q == p) {
                    jobs.push((*g, p, self.genome_seed(g, p)));
                }
            }
        }
        let problems = self.problems;
        let opts = self.config.evolve;
        let results: Vec<std::result::Result<f64, String>> = jobs
            .par_iter()
            .map(|(g, p, seed)| {
                problems[*p]
                    .run(g, *seed, opts)
                    .map(|r| r.best_fitness)
                    .map_err(|e| format!("{}: {e}", problems[*p].name))
            })
            .collect();
        for ((g, p, _), r) in jobs.into_iter().zip(results) {
            self.cache.insert((g.key(), p), r);
        }

        genomes
            .iter()
            .map(|g| {
                let mut per_problem = BTreeMap::new();
                let mut error = None;
                for (i, p) in self.problems.iter().enumerate() {
                    match &self.cache[&(g.key(), i)] {
                        Ok(f) => {
                            per_problem.insert(p.name.clone(), *f);
                        }
                        Err(e) => {
                            error.get_or_insert_with(|| e.clone());
                            per_problem.insert(p.name.clone(), 0.0);
                        }
                    }
                }
                Ok(ScoredGenome {
                    genome: *g,
                    evaluation: combine(per_problem, error, &self.weights)?,
                })
            })
            .collect()
    }

    fn finish_generation(&mut self, generation: usize) -> Result<()> {
        self.window.extend(
            self.population
                .iter()
                .filter(|s| s.evaluation.valid)
                .map(|s| s.evaluation.per_problem.clone()),
        );
        if (generation + 1).is_multiple_of(self.config.weight_update_period) {
            if !self.window.is_empty() {
                let mut means = BTreeMap::new();
                for p in self.problems {
                    let total: f64 = self.window.iter().map(|m| m[&p.name]).sum();
                    means.insert(p.name.clone(), total / self.window.len() as f64);
                }
                self.weights = update_weights(&self.weights, &means)?;
            }
            self.window.clear();
        }
        Ok(())
    }

    /// Runs the next generation and returns its record.
    pub fn step(&mut self) -> Result<MetaGeneration> {
        if self.is_done() {
            return Err(Error::config("meta-GA already finished"));
        }
        let generation = self.next_generation;
        let mut rng = rng_from_seed(derive_seed(self.seed, generation as u64));
        let genomes: Vec<ParameterGenome> = if generation == 0 {
            (0..self.config.meta_pop_size)
                .map(|_| self.config.gene_ranges.sample(&mut rng))
                .collect()
        } else {
            self.breed(&mut rng)?
        };
        self.population = self.evaluate(&genomes)?;

        let (gen_best_idx, gen_best) = self
            .population
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                if s.evaluation.fitness > acc.1 {
                    (i, s.evaluation.fitness)
                } else {
                    acc
                }
            });
        match self.best {
            Some((_, f)) if f >= gen_best => {}
            _ => self.best = Some((self.population[gen_best_idx].genome, gen_best)),
        }
        let (best_genome, best_fitness) = self.best.expect("best set above");
        let record = MetaGeneration {
            generation,
            best_genome,
            best_fitness,
            generation_best_fitness: gen_best,
            weights: self.weights.clone(),
            population: self.population.clone(),
        };
        self.next_generation += 1;
        self.finish_generation(generation)?;
        Ok(record)
    }
}

/// Runs the meta-GA to completion: generation 0 plus `meta_generations`
/// further generations.
pub fn run_meta_ga(problems: &[Problem], config: &MetaConfig, seed: u64) -> Result<Vec<MetaGeneration>> {
    let mut ga = MetaGa::new(problems, config.clone(), seed)?;
    let mut history = Vec::new();
    while !ga.is_done() {
        history.push(ga.step()?);
    }
    Ok(history)
}
