//! Tree-based GP: prefix-encoded program trees, ramped half-and-half
//! initialization, subtree crossover and subtree mutation.

mod primitives;
mod program;
mod variation;

pub use primitives::{AntAction, Func, PrimitiveSet, Terminal};
pub use program::{
    generate_random_tree, ramped_half_and_half, InitMethod, Node, ProgramTree, INIT_DEPTH, MAX_DEPTH,
};
pub use variation::{subtree_crossover, subtree_mutate, MUTATION_DEPTH};

use crate::error::{Error, Result};
use crate::evolve::{evolve, EvolveOptions, Representation, RunResult};
use crate::params::ParameterSet;
use crate::problems::Problem;
use crate::rng::Rng;

/// Tree genotypes scored on a [`Problem`].
pub struct TreeRepresentation<'a> {
    problem: &'a Problem,
    pset: PrimitiveSet,
}

impl<'a> TreeRepresentation<'a> {
    pub fn new(problem: &'a Problem) -> Result<Self> {
        let pset = problem.primitive_set().ok_or_else(|| {
            Error::config(format!("problem `{}` has no tree primitive set", problem.name))
        })?;
        Ok(TreeRepresentation { problem, pset })
    }

    pub fn primitive_set(&self) -> &PrimitiveSet {
        &self.pset
    }
}

impl Representation for TreeRepresentation<'_> {
    type Genotype = ProgramTree;

    fn random_individual(&self, rng: &mut Rng) -> ProgramTree {
        ramped_half_and_half(&self.pset, rng)
    }

    fn crossover(&self, a: &ProgramTree, b: &ProgramTree, rng: &mut Rng) -> (ProgramTree, ProgramTree) {
        subtree_crossover(a, b, rng)
    }

    fn mutate(&self, a: &ProgramTree, rng: &mut Rng) -> ProgramTree {
        subtree_mutate(a, &self.pset, rng)
    }

    fn fitness(&self, g: &ProgramTree) -> Result<f64> {
        self.problem.tree_fitness(g)
    }

    fn serialize(&self, g: &ProgramTree) -> String {
        g.to_sexpr(&self.pset)
    }

    fn is_valid(&self, g: &ProgramTree) -> bool {
        g.is_valid()
    }
}

/// One tree-GP run with default options.
pub fn run_evolution(problem: &Problem, params: &ParameterSet, seed: u64) -> Result<RunResult> {
    run_evolution_with(problem, params, seed, EvolveOptions::default())
}

pub fn run_evolution_with(
    problem: &Problem,
    params: &ParameterSet,
    seed: u64,
    opts: EvolveOptions,
) -> Result<RunResult> {
    let repr = TreeRepresentation::new(problem)?;
    evolve(&repr, params, seed, opts).map(|(result, _)| result)
}
