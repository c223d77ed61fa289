//! Scoring and success criteria shared by the tuners.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;

/// Mean of per-class recalls over the classes present in `truth`.
pub fn balanced_accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::Metrics(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Metrics("balanced accuracy of an empty sample".into()));
    }
    let n_classes = truth.iter().max().map_or(0, |&m| m + 1);
    let mut support = vec![0usize; n_classes];
    let mut hits = vec![0usize; n_classes];
    for (&p, &t) in predictions.iter().zip(truth) {
        support[t] += 1;
        if p == t {
            hits[t] += 1;
        }
    }
    let (sum, present) = support
        .iter()
        .zip(&hits)
        .filter(|(&s, _)| s > 0)
        .fold((0.0, 0usize), |(acc, n), (&s, &h)| (acc + h as f64 / s as f64, n + 1));
    Ok(sum / present as f64)
}

/// Per-problem fitness thresholds; a parameter set succeeds when every
/// problem reaches its threshold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuccessCriterion {
    pub per_problem_thresholds: BTreeMap<String, f64>,
}

impl SuccessCriterion {
    pub fn new(per_problem_thresholds: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((name, t)) = per_problem_thresholds
            .iter()
            .find(|(_, t)| !(0.0..=1.0).contains(*t))
        {
            return Err(Error::config(format!("threshold {t} for `{name}` outside [0, 1]")));
        }
        Ok(SuccessCriterion { per_problem_thresholds })
    }

    /// Uses each problem's own `success_threshold`.
    pub fn from_problems(problems: &[Problem]) -> Self {
        SuccessCriterion {
            per_problem_thresholds: problems
                .iter()
                .map(|p| (p.name.clone(), p.success_threshold))
                .collect(),
        }
    }

    /// The same threshold for every named problem.
    pub fn uniform<'a>(names: impl IntoIterator<Item = &'a str>, threshold: f64) -> Result<Self> {
        SuccessCriterion::new(names.into_iter().map(|n| (n.to_string(), threshold)).collect())
    }

    pub fn threshold(&self, problem: &str) -> Option<f64> {
        self.per_problem_thresholds.get(problem).copied()
    }

    /// Checks that `names` and the criterion cover the same problems.
    pub fn check_covers<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let names: Vec<&str> = names.into_iter().collect();
        for n in &names {
            if !self.per_problem_thresholds.contains_key(*n) {
                return Err(Error::config(format!("no threshold for problem `{n}`")));
            }
        }
        if let Some(extra) = self.per_problem_thresholds.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::config(format!("threshold for unknown problem `{extra}`")));
        }
        Ok(())
    }
}

/// True iff every criterion problem reached its threshold (inclusive).
pub fn evaluate_success(results: &BTreeMap<String, f64>, criterion: &SuccessCriterion) -> Result<bool> {
    let mut ok = true;
    for (name, &threshold) in &criterion.per_problem_thresholds {
        let fitness = results
            .get(name)
            .ok_or_else(|| Error::Metrics(format!("no result for problem `{name}`")))?;
        ok &= *fitness >= threshold;
    }
    Ok(ok)
}

/// Weighted mean of per-problem fitnesses. Weights must be non-negative,
/// sum to 1 within 1e-9, and use the same keys as `per_problem`.
pub fn aggregate_fitness(per_problem: &BTreeMap<String, f64>, weights: &BTreeMap<String, f64>) -> Result<f64> {
    if per_problem.len() != weights.len() || per_problem.keys().any(|k| !weights.contains_key(k)) {
        return Err(Error::Metrics("fitness and weight keys differ".into()));
    }
    if weights.values().any(|&w| !(w >= 0.0)) {
        return Err(Error::Metrics("negative weight".into()));
    }
    let sum: f64 = weights.values().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Metrics(format!("weights sum to {sum}, not 1")));
    }
    Ok(per_problem.iter().map(|(k, f)| f * weights[k]).sum())
}

/// Uniform weights over `names`.
pub fn uniform_weights<'a>(names: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, f64> {
    let names: Vec<&str> = names.into_iter().collect();
    let w = 1.0 / names.len() as f64;
    names.into_iter().map(|n| (n.to_string(), w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn perfect_and_majority_predictions() {
        let truth = vec![0, 1, 1, 0, 2];
        assert_eq!(balanced_accuracy(&truth, &truth).unwrap(), 1.0);
        let mut truth = vec![0usize; 90];
        truth.extend(vec![1usize; 10]);
        let majority = vec![0usize; 100];
        assert_eq!(balanced_accuracy(&majority, &truth).unwrap(), 0.5);
    }

    #[test]
    fn length_mismatch_and_empty_are_errors() {
        assert!(balanced_accuracy(&[0, 1], &[0]).is_err());
        assert!(balanced_accuracy(&[], &[]).is_err());
    }

    #[test]
    fn balanced_classes_give_plain_accuracy() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(17);
        for _ in 0..1000 {
            let k = rng.gen_range(2..5usize);
            let per = rng.gen_range(1..20usize);
            let truth: Vec<usize> = (0..k).flat_map(|c| std::iter::repeat_n(c, per)).collect();
            let pred: Vec<usize> = truth.iter().map(|_| rng.gen_range(0..k)).collect();
            let plain = pred.iter().zip(&truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64;
            let ba = balanced_accuracy(&pred, &truth).unwrap();
            assert!((ba - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn success_examples() {
        let c = SuccessCriterion::new(map(&[
            ("reg", 0.97),
            ("parity", 0.97),
            ("mux", 0.97),
            ("ant", 0.97),
            ("spam", 0.93),
        ]))
        .unwrap();
        let ok = map(&[("reg", 0.98), ("parity", 0.99), ("mux", 0.97), ("ant", 0.97), ("spam", 0.93)]);
        assert!(evaluate_success(&ok, &c).unwrap());
        let mut below = ok.clone();
        below.insert("mux".into(), 0.97 - 1e-12);
        assert!(!evaluate_success(&below, &c).unwrap());
        let mut missing = ok.clone();
        missing.remove("ant");
        assert!(evaluate_success(&missing, &c).is_err());
        let all_one = map(&[("reg", 1.0), ("parity", 1.0), ("mux", 1.0), ("ant", 1.0), ("spam", 1.0)]);
        assert!(evaluate_success(&all_one, &c).unwrap());
    }

    #[test]
    fn criterion_rejects_bad_thresholds() {
        assert!(SuccessCriterion::new(map(&[("a", 1.1)])).is_err());
        assert!(SuccessCriterion::new(map(&[("a", -0.1)])).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let f = map(&[("a", 0.8), ("b", 1.0)]);
        assert!((aggregate_fitness(&f, &uniform_weights(["a", "b"])).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(aggregate_fitness(&f, &map(&[("a", 1.0), ("b", 0.0)])).unwrap(), 0.8);
        assert!(aggregate_fitness(&f, &map(&[("a", 0.6), ("b", 0.6)])).is_err());
        assert!(aggregate_fitness(&f, &map(&[("a", 1.0)])).is_err());
    }

    proptest! {
        #[test]
        fn balanced_accuracy_is_permutation_invariant(
            pairs in prop::collection::vec((0usize..4, 0usize..4), 1..200),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let (p, t): (Vec<usize>, Vec<usize>) = pairs.iter().cloned().unzip();
            let a = balanced_accuracy(&p, &t).unwrap();
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut crate::rng::rng_from_seed(seed));
            let (p2, t2): (Vec<usize>, Vec<usize>) = shuffled.into_iter().unzip();
            let b = balanced_accuracy(&p2, &t2).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn success_is_monotone(
            fits in prop::collection::vec(0.0f64..=1.0, 3),
            bump in 0.0f64..0.5,
            which in 0usize..3,
        ) {
            let names = ["a", "b", "c"];
            let c = SuccessCriterion::uniform(names, 0.7).unwrap();
            let before: BTreeMap<String, f64> = names.iter().map(|n| n.to_string()).zip(fits.iter().cloned()).collect();
            let mut after = before.clone();
            *after.get_mut(names[which]).unwrap() += bump;
            if evaluate_success(&before, &c).unwrap() {
                prop_assert!(evaluate_success(&after, &c).unwrap());
            }
        }
    }
}
