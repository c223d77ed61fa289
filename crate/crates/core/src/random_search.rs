//! Random search over parameter sets, the random-solution baseline, and
//! single-problem sweeps.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{EvolveOptions, GenerationZero, Representation};
use crate::metrics::{evaluate_success, SuccessCriterion};
use crate::params::{ParameterRanges, ParameterSet};
use crate::problems::{EngineKind, Problem};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stack::StackRepresentation;
use crate::tree::TreeRepresentation;

pub use crate::params::sample_parameter_set;

/// One random-search trial: a sampled parameter set and one run per problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub trial: usize,
    pub params: ParameterSet,
    pub per_problem_fitness: BTreeMap<String, f64>,
    pub success: bool,
    pub seeds: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Unix seconds at completion, when enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl CampaignRecord {
    /// Recomputes the success flag from the stored fitnesses.
    pub fn audit(&self, criterion: &SuccessCriterion) -> Result<bool> {
        Ok(self.error.is_none() && evaluate_success(&self.per_problem_fitness, criterion)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub total: usize,
    pub successes: usize,
}

impl CampaignSummary {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a CampaignRecord>) -> Self {
        let mut s = CampaignSummary { total: 0, successes: 0 };
        for r in records {
            s.total += 1;
            s.successes += r.success as usize;
        }
        s
    }

    /// Successes over total, or 0 for an empty campaign.
    pub fn yield_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.successes as f64 / self.total as f64
        }
    }
}

fn check_problems(problems: &[Problem], criterion: &SuccessCriterion) -> Result<()> {
    if problems.is_empty() {
        return Err(Error::config("no problems given"));
    }
    criterion.check_covers(problems.iter().map(|p| p.name.as_str()))
}

/// Runs trial `trial` of a campaign seeded with `master_seed`.
pub fn run_trial(
    problems: &[Problem],
    ranges: &ParameterRanges,
    criterion: &SuccessCriterion,
    trial: usize,
    master_seed: u64,
    opts: EvolveOptions,
) -> Result<CampaignRecord> {
    let trial_seed = derive_seed(master_seed, trial as u64);
    let params = ranges.sample(&mut rng_from_seed(trial_seed));
    let mut per_problem_fitness = BTreeMap::new();
    let mut seeds = BTreeMap::new();
    let mut error = None;
    for (p, problem) in problems.iter().enumerate() {
        let seed = derive_seed(trial_seed, p as u64 + 1);
        seeds.insert(problem.name.clone(), seed);
        let fitness = match problem.run(&params, seed, opts) {
            Ok(r) => r.best_fitness,
            Err(e) => {
                error.get_or_insert_with(|| format!("{}: {e}", problem.name));
                0.0
            }
        };
        per_problem_fitness.insert(problem.name.clone(), fitness);
    }
    let success = error.is_none() && evaluate_success(&per_problem_fitness, criterion)?;
    Ok(CampaignRecord {
        trial,
        params,
        per_problem_fitness,
        success,
        seeds,
        error,
        timestamp: None,
    })
}

/// Runs `f` over `indices` on the rayon pool in batches and hands results to
/// `sink` in index order.
pub(crate) fn ordered_for_each<T: Send>(
    indices: Range<usize>,
    f: impl Fn(usize) -> Result<T> + Sync,
    mut sink: impl FnMut(T) -> Result<()>,
) -> Result<()> {
    let batch = rayon::current_num_threads().max(1);
    let mut start = indices.start;
    while start < indices.end {
        let end = (start + batch).min(indices.end);
        let done: Vec<Result<T>> = (start..end).into_par_iter().map(&f).collect();
        for r in done {
            sink(r?)?;
        }
        start = end;
    }
    Ok(())
}

/// Runs the trials in `trials`, passing each record to `sink` in trial order.
pub fn run_campaign_with(
    problems: &[Problem],
    ranges: &ParameterRanges,
    criterion: &SuccessCriterion,
    trials: Range<usize>,
    master_seed: u64,
    opts: EvolveOptions,
    sink: impl FnMut(CampaignRecord) -> Result<()>,
) -> Result<()> {
    check_problems(problems, criterion)?;
    ranges.validate()?;
    ordered_for_each(
        trials,
        |i| run_trial(problems, ranges, criterion, i, master_seed, opts),
        sink,
    )
}

pub fn run_campaign(
    problems: &[Problem],
    ranges: &ParameterRanges,
    criterion: &SuccessCriterion,
    n_trials: usize,
    master_seed: u64,
) -> Result<Vec<CampaignRecord>> {
    if n_trials < 1 {
        return Err(Error::config("n_trials must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_trials);
    run_campaign_with(
        problems,
        ranges,
        criterion,
        0..n_trials,
        master_seed,
        EvolveOptions::default(),
        |r| {
            out.push(r);
            Ok(())
        },
    )?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineOutcome {
    /// Drawn uniformly from `[1, k]`.
    pub multiplier: u64,
    /// `pop_size * generations * multiplier` candidates.
    pub solutions_tested: u64,
    pub passes: u64,
    /// Programs drawn across all problems; fewer than
    /// `solutions_tested * problems` because candidates stop at their first
    /// failed problem.
    pub programs_generated: u64,
}

enum AnyRepr<'a> {
    Tree(TreeRepresentation<'a>),
    Stack(StackRepresentation<'a>),
}

impl<'a> AnyRepr<'a> {
    fn new(problem: &'a Problem) -> Result<Self> {
        Ok(match problem.engine {
            EngineKind::Tree => AnyRepr::Tree(TreeRepresentation::new(problem)?),
            EngineKind::Stack => AnyRepr::Stack(StackRepresentation::new(problem.dataset().ok_or_else(
                || Error::config(format!("problem `{}` has no dataset", problem.name)),
            )?)?),
        })
    }

    /// A stream of fitnesses of generation-zero individuals.
    fn scorer(&self, seed: u64) -> Box<dyn FnMut() -> Result<f64> + '_> {
        fn boxed<R: Representation>(r: &R, seed: u64) -> Box<dyn FnMut() -> Result<f64> + '_> {
            let mut gen0 = GenerationZero::new(r, seed);
            Box::new(move || r.fitness(&gen0.next().expect("endless stream")))
        }
        match self {
            AnyRepr::Tree(r) => boxed(r, seed),
            AnyRepr::Stack(r) => boxed(r, seed),
        }
    }
}

/// Seed of problem `p`'s generation-zero sampler in a baseline run.
pub fn baseline_sampler_seed(seed: u64, p: usize) -> u64 {
    derive_seed(seed, p as u64 + 1)
}

/// Draws `pop_size * generations * m` random candidates (`m` uniform in
/// `[1, k]`) from each problem's generation-zero sampler and counts those
/// that meet the criterion on every problem. A candidate is dropped at its
/// first failed problem.
pub fn random_baseline(
    params: &ParameterSet,
    problems: &[Problem],
    criterion: &SuccessCriterion,
    k: u64,
    seed: u64,
) -> Result<BaselineOutcome> {
    params.validate()?;
    check_problems(problems, criterion)?;
    if k < 1 {
        return Err(Error::config("baseline multiplier bound k must be at least 1"));
    }
    let multiplier = rng_from_seed(seed).gen_range(1..=k);
    let solutions_tested = params.pop_size as u64 * params.generations as u64 * multiplier;

    let reprs = problems.iter().map(AnyRepr::new).collect::<Result<Vec<_>>>()?;
    let mut scorers: Vec<_> = reprs
        .iter()
        .enumerate()
        .map(|(p, r)| r.scorer(baseline_sampler_seed(seed, p)))
        .collect();
    let thresholds: Vec<f64> = problems
        .iter()
        .map(|p| criterion.threshold(&p.name).expect("criterion covers every problem"))
        .collect();

    let mut passes = 0;
    let mut programs_generated = 0;
    for _ in 0..solutions_tested {
        let mut ok = true;
        for (scorer, &t) in scorers.iter_mut().zip(&thresholds) {
            programs_generated += 1;
            if scorer()? < t {
                ok = false;
                break;
            }
        }
        passes += ok as u64;
    }
    Ok(BaselineOutcome {
        multiplier,
        solutions_tested,
        passes,
        programs_generated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub set: usize,
    pub problem: String,
    pub params: ParameterSet,
    pub best_fitness: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Parameter set `set` of a sweep on `problem`, and its run.
pub fn sweep_set(
    problem: &Problem,
    ranges: &ParameterRanges,
    set: usize,
    master_seed: u64,
    opts: EvolveOptions,
) -> SweepRecord {
    let set_seed = derive_seed(master_seed, set as u64);
    let params = ranges.sample(&mut rng_from_seed(set_seed));
    let seed = derive_seed(set_seed, 1);
    let (best_fitness, error) = match problem.run(&params, seed, opts) {
        Ok(r) => (r.best_fitness, None),
        Err(e) => (0.0, Some(e.to_string())),
    };
    SweepRecord {
        set,
        problem: problem.name.clone(),
        params,
        best_fitness,
        seed,
        error,
    }
}

/// Sorts sweep records by best fitness, highest first; ties keep set order.
pub fn sort_sweep(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| b.best_fitness.total_cmp(&a.best_fitness).then(a.set.cmp(&b.set)));
}

/// `n_sets` random parameter sets, one run each, sorted by best fitness.
pub fn single_problem_sweep(
    problem: &Problem,
    ranges: &ParameterRanges,
    n_sets: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    if n_sets < 1 {
        return Err(Error::config("n_sets must be at least 1"));
    }
    ranges.validate()?;
    let mut out = Vec::with_capacity(n_sets);
    ordered_for_each(
        0..n_sets,
        |i| Ok(sweep_set(problem, ranges, i, seed, EvolveOptions::default())),
        |r| {
            out.push(r);
            Ok(())
        },
    )?;
    sort_sweep(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::initial_population;
    use crate::params::Interval;

    fn tiny() -> ParameterRanges {
        ParameterRanges {
            pop_size: Interval::new(100, 100),
            generations: Interval::new(1, 2),
            crossover_rate: Interval::new(0.0, 1.0),
            mutation_rate: Interval::new(0.0, 1.0),
            tournament_size: Interval::new(3, 5),
        }
    }

    #[test]
    fn single_trial_covers_every_problem() {
        let problems = vec![Problem::quartic(20, -1.0, 1.0).unwrap(), Problem::parity(3).unwrap()];
        let c = SuccessCriterion::from_problems(&problems);
        let recs = run_campaign(&problems, &tiny(), &c, 1, 4).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].per_problem_fitness.len(), 2);
        assert_eq!(recs[0].seeds.len(), 2);
        assert_eq!(recs[0].audit(&c).unwrap(), recs[0].success);
    }

    #[test]
    fn zero_thresholds_make_every_trial_succeed() {
        let problems = vec![Problem::parity(3).unwrap()];
        let c = SuccessCriterion::uniform(["parity-3"], 0.0).unwrap();
        let recs = run_campaign(&problems, &tiny(), &c, 3, 9).unwrap();
        assert!(recs.iter().all(|r| r.success));
    }

    #[test]
    fn campaign_is_deterministic() {
        let problems = vec![Problem::multiplexer(2).unwrap()];
        let c = SuccessCriterion::from_problems(&problems);
        let a = run_campaign(&problems, &tiny(), &c, 4, 11).unwrap();
        let b = run_campaign(&problems, &tiny(), &c, 4, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, r)| r.trial == i));
    }

    #[test]
    fn criterion_must_match_problems() {
        let problems = vec![Problem::parity(3).unwrap()];
        let c = SuccessCriterion::uniform(["other"], 0.5).unwrap();
        assert!(run_campaign(&problems, &tiny(), &c, 1, 0).is_err());
        assert!(run_campaign(&problems, &tiny(), &SuccessCriterion::from_problems(&problems), 0, 0).is_err());
    }

    #[test]
    fn baseline_with_zero_thresholds_passes_everything() {
        let problems = vec![Problem::parity(3).unwrap(), Problem::quartic(10, -1.0, 1.0).unwrap()];
        let c = SuccessCriterion::uniform(["parity-3", "quartic"], 0.0).unwrap();
        let p = ParameterSet {
            pop_size: 100,
            generations: 2,
            crossover_rate: 0.5,
            mutation_rate: 0.5,
            tournament_size: 3,
        };
        let out = random_baseline(&p, &problems, &c, 3, 5).unwrap();
        assert!((1..=3).contains(&out.multiplier));
        assert_eq!(out.solutions_tested, 200 * out.multiplier);
        assert_eq!(out.passes, out.solutions_tested);
        assert_eq!(out.programs_generated, 2 * out.solutions_tested);
    }

    #[test]
    fn baseline_with_unreachable_thresholds_passes_nothing() {
        // Five steps can eat at most five of the 89 pellets.
        let trail = crate::problems::AntTrail::parse(crate::problems::SANTA_FE_TEXT, 5).unwrap();
        let starved = vec![Problem::ant(trail).with_threshold(1.0).unwrap()];
        let p = ParameterSet {
            pop_size: 100,
            generations: 1,
            crossover_rate: 0.5,
            mutation_rate: 0.5,
            tournament_size: 3,
        };
        let out = random_baseline(&p, &starved, &SuccessCriterion::from_problems(&starved), 2, 1).unwrap();
        assert_eq!(out.passes, 0);
        assert_eq!(out.programs_generated, out.solutions_tested);
    }

    #[test]
    fn baseline_draws_from_generation_zero() {
        let problem = Problem::parity(3).unwrap();
        let repr = TreeRepresentation::new(&problem).unwrap();
        let seed = baseline_sampler_seed(42, 0);
        let direct: Vec<f64> = initial_population(&repr, 50, seed)
            .iter()
            .map(|t| repr.fitness(t).unwrap())
            .collect();
        let any = AnyRepr::new(&problem).unwrap();
        let mut scorer = any.scorer(seed);
        let sampled: Vec<f64> = (0..50).map(|_| scorer().unwrap()).collect();
        assert_eq!(sampled, direct);
    }

    #[test]
    fn sweep_is_sorted_and_sized() {
        let problem = Problem::parity(3).unwrap();
        let one = single_problem_sweep(&problem, &tiny(), 1, 2).unwrap();
        assert_eq!(one.len(), 1);
        let many = single_problem_sweep(&problem, &tiny(), 6, 2).unwrap();
        assert_eq!(many.len(), 6);
        assert!(many.windows(2).all(|w| w[0].best_fitness >= w[1].best_fitness));
    }

    #[test]
    fn summary_yield() {
        let mut r = run_campaign(
            &[Problem::parity(3).unwrap()],
            &tiny(),
            &SuccessCriterion::uniform(["parity-3"], 0.0).unwrap(),
            1,
            0,
        )
        .unwrap()
        .remove(0);
        let mut recs = Vec::new();
        for i in 0..10 {
            r.success = i < 3;
            recs.push(r.clone());
        }
        let s = CampaignSummary::from_records(&recs);
        assert_eq!((s.total, s.successes), (10, 3));
        assert!((s.yield_fraction() - 0.3).abs() < 1e-12);
        assert_eq!(CampaignSummary::from_records(&[]).yield_fraction(), 0.0);
    }
}
