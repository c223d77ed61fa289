//! Subtree crossover and subtree mutation with a depth guard.

use rand::Rng as _;

use super::primitives::PrimitiveSet;
use super::program::{generate_random_tree, InitMethod, ProgramTree, MAX_DEPTH};
use crate::rng::Rng;

/// Depth bound of the fresh subtree inserted by mutation.
pub const MUTATION_DEPTH: usize = 2;

/// Swaps one uniformly chosen subtree of `a` with one of `b`. A child deeper
/// than [`MAX_DEPTH`] is replaced by its own parent.
pub fn subtree_crossover(a: &ProgramTree, b: &ProgramTree, rng: &mut Rng) -> (ProgramTree, ProgramTree) {
    let i = rng.gen_range(0..a.len());
    let j = rng.gen_range(0..b.len());
    // Identical parents exchange the same position so children keep the
    // parent's semantics.
    let j = if a == b { i } else { j };
    let sub_a = a.subtree(i).to_vec();
    let sub_b = b.subtree(j).to_vec();
    let c1 = a.replace_subtree(i, &sub_b);
    let c2 = b.replace_subtree(j, &sub_a);
    let c1 = if c1.depth() > MAX_DEPTH { a.clone() } else { c1 };
    let c2 = if c2.depth() > MAX_DEPTH { b.clone() } else { c2 };
    (c1, c2)
}

/// Replaces one uniformly chosen subtree with a fresh grow tree of depth at
/// most [`MUTATION_DEPTH`]. Reverts to the parent if the result is too deep.
pub fn subtree_mutate(a: &ProgramTree, pset: &PrimitiveSet, rng: &mut Rng) -> ProgramTree {
    let i = rng.gen_range(0..a.len());
    let fresh = generate_random_tree(pset, 1, MUTATION_DEPTH, InitMethod::Grow, rng)
        .expect("primitive sets are validated on construction");
    let child = a.replace_subtree(i, fresh.nodes());
    if child.depth() > MAX_DEPTH {
        a.clone()
    } else {
        child
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::tree::primitives::{Func, Terminal};

    fn pset_xy() -> PrimitiveSet {
        PrimitiveSet::new(
            vec![Func::Add, Func::Mul, Func::Sub],
            vec![
                Terminal::Input { name: "x".into(), index: 0 },
                Terminal::Input { name: "y".into(), index: 1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_terminals_exchange() {
        let p = pset_xy();
        let a = ProgramTree::parse("x", &p).unwrap();
        let b = ProgramTree::parse("y", &p).unwrap();
        let mut rng = rng_from_seed(0);
        let (c1, c2) = subtree_crossover(&a, &b, &mut rng);
        assert_eq!(c1, b);
        assert_eq!(c2, a);
    }

    #[test]
    fn crossing_identical_trees_preserves_semantics() {
        let p = PrimitiveSet::regression();
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let t = crate::tree::program::ramped_half_and_half(&p, &mut rng);
            let (c1, c2) = subtree_crossover(&t, &t, &mut rng);
            for k in 0..10 {
                let x = -1.0 + 0.2 * k as f64;
                let v = t.evaluate(&[x]).unwrap();
                for c in [&c1, &c2] {
                    let w = c.evaluate(&[x]).unwrap();
                    assert!(v.to_bits() == w.to_bits() || (v.is_nan() && w.is_nan()));
                }
            }
        }
    }

    #[test]
    fn crossover_never_exceeds_max_depth() {
        let p = pset_xy();
        let mut rng = rng_from_seed(11);
        for _ in 0..1000 {
            let a = generate_random_tree(&p, 10, 10, InitMethod::Full, &mut rng).unwrap();
            let b = generate_random_tree(&p, 10, 10, InitMethod::Grow, &mut rng).unwrap();
            let (c1, c2) = subtree_crossover(&a, &b, &mut rng);
            assert!(c1.depth() <= MAX_DEPTH && c1.is_valid());
            assert!(c2.depth() <= MAX_DEPTH && c2.is_valid());
        }
    }

    #[test]
    fn mutating_a_terminal_yields_a_shallow_tree() {
        let p = pset_xy();
        let a = ProgramTree::parse("x", &p).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let m = subtree_mutate(&a, &p, &mut rng);
            assert!(m.depth() <= MUTATION_DEPTH && m.is_valid());
        }
    }

    #[test]
    fn mutation_with_only_one_terminal_is_forced() {
        let p = PrimitiveSet::new(vec![], vec![Terminal::Input { name: "x".into(), index: 0 }]).unwrap();
        let a = ProgramTree::parse("x", &p).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            assert_eq!(subtree_mutate(&a, &p, &mut rng), a);
        }
    }

    #[test]
    fn repeated_mutation_stays_valid() {
        let p = PrimitiveSet::regression();
        let mut rng = rng_from_seed(8);
        let mut t = crate::tree::program::ramped_half_and_half(&p, &mut rng);
        for _ in 0..1000 {
            t = subtree_mutate(&t, &p, &mut rng);
            assert!(t.is_valid());
            assert!(t.depth() <= MAX_DEPTH);
        }
    }
}
