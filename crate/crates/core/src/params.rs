//! The five evolutionary hyper-parameters and the ranges they are drawn from.

use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Hyper-parameters of one GP run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub pop_size: u32,
    pub generations: u32,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: u32,
}

/// Position of a gene in the linear five-gene encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gene {
    PopSize,
    Generations,
    CrossoverRate,
    MutationRate,
    TournamentSize,
}

impl Gene {
    pub const ALL: [Gene; 5] = [
        Gene::PopSize,
        Gene::Generations,
        Gene::CrossoverRate,
        Gene::MutationRate,
        Gene::TournamentSize,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Gene::PopSize => "pop_size",
            Gene::Generations => "generations",
            Gene::CrossoverRate => "crossover_rate",
            Gene::MutationRate => "mutation_rate",
            Gene::TournamentSize => "tournament_size",
        }
    }
}

/// Value of a single gene; integer genes and real genes never mix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneValue {
    Int(u32),
    Real(f64),
}

impl GeneValue {
    pub fn as_f64(self) -> f64 {
        match self {
            GeneValue::Int(v) => v as f64,
            GeneValue::Real(v) => v,
        }
    }
}

impl ParameterSet {
    /// Hard engine limits. These are the widest meta-GA gene ranges except
    /// for the generation floor, which goes down to 1 so that desk-scale
    /// campaigns can use short runs.
    pub const LIMITS: ParameterRanges = ParameterRanges {
        pop_size: Interval { lo: 100, hi: 3000 },
        generations: Interval { lo: 1, hi: 2000 },
        crossover_rate: Interval { lo: 0.0, hi: 1.0 },
        mutation_rate: Interval { lo: 0.0, hi: 1.0 },
        tournament_size: Interval { lo: 3, hi: 100 },
    };

    pub fn validate(&self) -> Result<()> {
        if !Self::LIMITS.contains(self) {
            return Err(Error::config(format!("parameter set out of range: {self}")));
        }
        if self.tournament_size > self.pop_size {
            return Err(Error::config(format!(
                "tournament size {} exceeds population size {}",
                self.tournament_size, self.pop_size
            )));
        }
        Ok(())
    }

    pub fn gene(&self, gene: Gene) -> GeneValue {
        match gene {
            Gene::PopSize => GeneValue::Int(self.pop_size),
            Gene::Generations => GeneValue::Int(self.generations),
            Gene::CrossoverRate => GeneValue::Real(self.crossover_rate),
            Gene::MutationRate => GeneValue::Real(self.mutation_rate),
            Gene::TournamentSize => GeneValue::Int(self.tournament_size),
        }
    }

    /// Copies gene `gene` from `other` into `self`.
    pub fn copy_gene_from(&mut self, other: &ParameterSet, gene: Gene) {
        match gene {
            Gene::PopSize => self.pop_size = other.pop_size,
            Gene::Generations => self.generations = other.generations,
            Gene::CrossoverRate => self.crossover_rate = other.crossover_rate,
            Gene::MutationRate => self.mutation_rate = other.mutation_rate,
            Gene::TournamentSize => self.tournament_size = other.tournament_size,
        }
    }

    /// Bit-exact key, usable for hashing and caching.
    pub fn key(&self) -> [u64; 5] {
        [
            self.pop_size as u64,
            self.generations as u64,
            self.crossover_rate.to_bits(),
            self.mutation_rate.to_bits(),
            self.tournament_size as u64,
        ]
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pop={} gen={} xo={:.4} mu={:.4} tour={}",
            self.pop_size, self.generations, self.crossover_rate, self.mutation_rate, self.tournament_size
        )
    }
}

/// Closed interval `[lo, hi]`, written as a two-element array in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(T, T)", into = "(T, T)")]
pub struct Interval<T: Copy> {
    pub lo: T,
    pub hi: T,
}

impl<T: Copy> From<(T, T)> for Interval<T> {
    fn from((lo, hi): (T, T)) -> Self {
        Interval { lo, hi }
    }
}

impl<T: Copy> From<Interval<T>> for (T, T) {
    fn from(i: Interval<T>) -> Self {
        (i.lo, i.hi)
    }
}

impl<T: Copy + PartialOrd> Interval<T> {
    pub const fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_within(&self, outer: &Interval<T>) -> bool {
        self.lo <= self.hi && outer.contains(self.lo) && outer.contains(self.hi)
    }
}

impl Interval<f64> {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl Interval<u32> {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) as f64
    }
}

/// Per-gene closed intervals that parameter sets are sampled from. Config
/// files may also name a preset: `widest`, `tree`, `stack` or `desk`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RangesRepr")]
pub struct ParameterRanges {
    pub pop_size: Interval<u32>,
    pub generations: Interval<u32>,
    pub crossover_rate: Interval<f64>,
    pub mutation_rate: Interval<f64>,
    pub tournament_size: Interval<u32>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RangesRepr {
    Preset(String),
    #[serde(rename_all = "snake_case")]
    Explicit {
        pop_size: Interval<u32>,
        generations: Interval<u32>,
        crossover_rate: Interval<f64>,
        mutation_rate: Interval<f64>,
        tournament_size: Interval<u32>,
    },
}

impl TryFrom<RangesRepr> for ParameterRanges {
    type Error = Error;

    fn try_from(r: RangesRepr) -> Result<Self> {
        match r {
            RangesRepr::Preset(name) => ParameterRanges::preset(&name)
                .ok_or_else(|| Error::config(format!("unknown range preset `{name}`"))),
            RangesRepr::Explicit {
                pop_size,
                generations,
                crossover_rate,
                mutation_rate,
                tournament_size,
            } => Ok(ParameterRanges {
                pop_size,
                generations,
                crossover_rate,
                mutation_rate,
                tournament_size,
            }),
        }
    }
}

impl ParameterRanges {
    pub fn preset(name: &str) -> Option<ParameterRanges> {
        match name {
            "widest" => Some(ParameterRanges::WIDEST),
            "tree" => Some(ParameterRanges::TREE_CAMPAIGN),
            "stack" => Some(ParameterRanges::STACK_CAMPAIGN),
            "desk" => Some(ParameterRanges::DESK),
            _ => None,
        }
    }

    /// Widest ranges searched by the meta-GA.
    pub const WIDEST: ParameterRanges = ParameterRanges {
        pop_size: Interval::new(100, 3000),
        generations: Interval::new(100, 2000),
        crossover_rate: Interval::new(0.0, 1.0),
        mutation_rate: Interval::new(0.0, 1.0),
        tournament_size: Interval::new(3, 100),
    };

    /// Ranges of the five-problem tree-GP random search.
    pub const TREE_CAMPAIGN: ParameterRanges = ParameterRanges {
        pop_size: Interval::new(100, 1000),
        generations: Interval::new(100, 1000),
        crossover_rate: Interval::new(0.0, 1.0),
        mutation_rate: Interval::new(0.0, 1.0),
        tournament_size: Interval::new(3, 30),
    };

    /// Ranges of the stack-GP random searches.
    pub const STACK_CAMPAIGN: ParameterRanges = ParameterRanges {
        pop_size: Interval::new(100, 2000),
        generations: Interval::new(100, 2000),
        crossover_rate: Interval::new(0.0, 1.0),
        mutation_rate: Interval::new(0.0, 1.0),
        tournament_size: Interval::new(3, 30),
    };

    /// Small ranges that finish in minutes on one core.
    pub const DESK: ParameterRanges = ParameterRanges {
        pop_size: Interval::new(100, 500),
        generations: Interval::new(50, 200),
        crossover_rate: Interval::new(0.0, 1.0),
        mutation_rate: Interval::new(0.0, 1.0),
        tournament_size: Interval::new(3, 30),
    };

    pub fn contains(&self, p: &ParameterSet) -> bool {
        self.pop_size.contains(p.pop_size)
            && self.generations.contains(p.generations)
            && self.crossover_rate.contains(p.crossover_rate)
            && self.mutation_rate.contains(p.mutation_rate)
            && self.tournament_size.contains(p.tournament_size)
    }

    /// Checks `lo <= hi` for every gene and that each interval lies inside
    /// the engine limits.
    pub fn validate(&self) -> Result<()> {
        let l = ParameterSet::LIMITS;
        let ok = self.pop_size.is_within(&l.pop_size)
            && self.generations.is_within(&l.generations)
            && self.crossover_rate.is_within(&l.crossover_rate)
            && self.mutation_rate.is_within(&l.mutation_rate)
            && self.tournament_size.is_within(&l.tournament_size);
        if !ok {
            return Err(Error::config(format!("invalid parameter ranges: {self:?}")));
        }
        if self.tournament_size.lo > self.pop_size.hi {
            return Err(Error::config("tournament range lies entirely above population range"));
        }
        Ok(())
    }

    /// Draws a fresh value for one gene, uniformly over its interval.
    pub fn sample_gene(&self, gene: Gene, rng: &mut Rng) -> GeneValue {
        match gene {
            Gene::PopSize => GeneValue::Int(rng.gen_range(self.pop_size.lo..=self.pop_size.hi)),
            Gene::Generations => {
                GeneValue::Int(rng.gen_range(self.generations.lo..=self.generations.hi))
            }
            Gene::CrossoverRate => {
                GeneValue::Real(rng.gen_range(self.crossover_rate.lo..=self.crossover_rate.hi))
            }
            Gene::MutationRate => {
                GeneValue::Real(rng.gen_range(self.mutation_rate.lo..=self.mutation_rate.hi))
            }
            Gene::TournamentSize => {
                GeneValue::Int(rng.gen_range(self.tournament_size.lo..=self.tournament_size.hi))
            }
        }
    }

    /// Draws every gene independently and uniformly. Integer genes are
    /// inclusive at both ends.
    pub fn sample(&self, rng: &mut Rng) -> ParameterSet {
        let mut p = ParameterSet {
            pop_size: 0,
            generations: 0,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            tournament_size: 0,
        };
        for gene in Gene::ALL {
            p.set_gene(gene, self.sample_gene(gene, rng));
        }
        p.tournament_size = p.tournament_size.min(p.pop_size);
        p
    }
}

impl ParameterSet {
    /// Overwrites one gene. Panics on a kind mismatch, which is a logic error.
    pub fn set_gene(&mut self, gene: Gene, value: GeneValue) {
        match (gene, value) {
            (Gene::PopSize, GeneValue::Int(v)) => self.pop_size = v,
            (Gene::Generations, GeneValue::Int(v)) => self.generations = v,
            (Gene::CrossoverRate, GeneValue::Real(v)) => self.crossover_rate = v,
            (Gene::MutationRate, GeneValue::Real(v)) => self.mutation_rate = v,
            (Gene::TournamentSize, GeneValue::Int(v)) => self.tournament_size = v,
            (g, v) => panic!("gene {} cannot hold {v:?}", g.name()),
        }
    }
}

/// Draws a parameter set uniformly from `ranges`.
pub fn sample_parameter_set(ranges: &ParameterRanges, rng: &mut Rng) -> ParameterSet {
    ranges.sample(rng)
}
