//! Tournament selection, shared by every engine and the meta-GA.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Returns the index of the fittest of `k` uniform draws (with replacement)
/// from `fitnesses`. Ties go to the candidate drawn first.
pub fn tournament_index(fitnesses: &[f64], k: usize, rng: &mut Rng) -> Result<usize> {
    if k < 1 {
        return Err(Error::config("tournament size must be at least 1"));
    }
    if fitnesses.is_empty() {
        return Err(Error::config("cannot select from an empty population"));
    }
    let n = fitnesses.len();
    let mut best = rng.gen_range(0..n);
    for _ in 1..k {
        let c = rng.gen_range(0..n);
        if fitnesses[c] > fitnesses[best] {
            best = c;
        }
    }
    Ok(best)
}

/// Tournament selection over `(genotype, fitness)` pairs.
pub fn tournament_select<'a, G>(population: &'a [(G, f64)], k: usize, rng: &mut Rng) -> Result<&'a G> {
    let fits: Vec<f64> = population.iter().map(|(_, f)| *f).collect();
    let i = tournament_index(&fits, k, rng)?;
    Ok(&population[i].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn single_member_always_wins() {
        let pop = vec![("only", 0.1)];
        let mut rng = rng_from_seed(1);
        for k in 1..5 {
            assert_eq!(*tournament_select(&pop, k, &mut rng).unwrap(), "only");
        }
    }

    #[test]
    fn zero_k_and_empty_population_are_errors() {
        let mut rng = rng_from_seed(1);
        assert!(tournament_index(&[1.0], 0, &mut rng).is_err());
        assert!(tournament_index(&[], 3, &mut rng).is_err());
    }

    #[test]
    fn ties_go_to_the_first_draw() {
        // All equal: the winner must be the first index drawn, which we can
        // replay from an identically seeded generator.
        let fits = vec![0.5; 10];
        for seed in 0..50 {
            let mut a = rng_from_seed(seed);
            let mut b = rng_from_seed(seed);
            let w = tournament_index(&fits, 4, &mut a).unwrap();
            let first = b.gen_range(0..10usize);
            assert_eq!(w, first);
        }
    }

    #[test]
    fn best_wins_with_analytic_frequency() {
        // P(best in 3 draws with replacement) = 1 - ((n-1)/n)^3.
        let n = 10usize;
        let fits: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let trials = 10_000;
        let mut rng = rng_from_seed(42);
        let wins = (0..trials)
            .filter(|_| tournament_index(&fits, 3, &mut rng).unwrap() == n - 1)
            .count();
        let p = 1.0 - ((n as f64 - 1.0) / n as f64).powi(3);
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((wins as f64 - trials as f64 * p).abs() <= 3.0 * sigma, "wins {wins}");
    }

    #[test]
    fn k_equal_to_population_size() {
        let n = 8usize;
        let fits: Vec<f64> = (0..n).map(|i| (i * 7 % n) as f64).collect();
        let best = fits.iter().cloned().fold(f64::MIN, f64::max);
        let trials = 10_000;
        let mut rng = rng_from_seed(7);
        let mut wins = 0;
        for _ in 0..trials {
            let mut replay = rng.clone();
            let w = tournament_index(&fits, n, &mut rng).unwrap();
            let drawn: Vec<usize> = (0..n).map(|_| replay.gen_range(0..n)).collect();
            assert!(drawn.iter().all(|&d| fits[w] >= fits[d]));
            if fits[w] == best {
                wins += 1;
            }
        }
        let p = 1.0 - ((n as f64 - 1.0) / n as f64).powi(n as i32);
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((wins as f64 - trials as f64 * p).abs() <= 3.0 * sigma, "wins {wins}");
    }
}
