use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EvolveOptions;
use crate::meta::MetaConfig;
use crate::metrics::SuccessCriterion;
use crate::params::ParameterRanges;
use crate::problems::{Problem, ProblemSpec, DEFAULT_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Meta,
    Random,
    Baseline,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    /// Results file of a random-search campaign.
    pub source: PathBuf,
    /// Number of successful sets to test, best first.
    #[serde(default = "default_top")]
    pub top: usize,
    /// Candidate count multiplier is drawn from `[1, k]`.
    #[serde(default = "default_k")]
    pub k: u64,
}

fn default_top() -> usize {
    3
}
fn default_k() -> u64 {
    5
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_trials() -> usize {
    50
}
fn default_sets() -> usize {
    100
}
fn default_out() -> PathBuf {
    PathBuf::from("results")
}
fn default_ranges() -> ParameterRanges {
    ParameterRanges::TREE_CAMPAIGN
}

/// One experiment, read from a TOML file. `workers` and `out_dir` only
/// affect where and how fast it runs, so they are left out of the copy
/// stored in the results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Campaign name; output files are prefixed with it.
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    #[serde(default = "default_out", skip_serializing)]
    pub out_dir: PathBuf,
    pub problems: Vec<ProblemSpec>,
    /// Success threshold for problems that do not set their own.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_ranges")]
    pub ranges: ParameterRanges,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_sets")]
    pub n_sets: usize,
    #[serde(default)]
    pub meta: MetaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineConfig>,
    #[serde(default)]
    pub evolve: EvolveOptions,
    /// Stamp each trial record with its completion time. Off by default so
    /// that reruns produce identical files.
    #[serde(default)]
    pub timestamps: bool,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, name: impl Into<String>, problems: Vec<ProblemSpec>) -> Self {
        ExperimentConfig {
            mode,
            name: name.into(),
            seed: 0,
            workers: None,
            out_dir: default_out(),
            problems,
            threshold: DEFAULT_THRESHOLD,
            ranges: default_ranges(),
            n_trials: default_trials(),
            n_sets: default_sets(),
            meta: MetaConfig::default(),
            baseline: None,
            evolve: EvolveOptions::default(),
            timestamps: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Builds every problem, applying the global threshold where a problem
    /// has none of its own.
    pub fn build_problems(&self) -> Result<Vec<Problem>> {
        let problems = self
            .problems
            .iter()
            .map(|spec| {
                let p = spec.build()?;
                match spec.threshold {
                    Some(_) => Ok(p),
                    None => p.with_threshold(self.threshold),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in problems.iter().enumerate() {
            if problems[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::config(format!("duplicate problem name `{}`", p.name)));
            }
        }
        Ok(problems)
    }

    pub fn results_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}.results.jsonl", self.name))
    }

    /// Checks everything that can be checked without running, and returns
    /// the built problems and their success criterion.
    pub fn validate(&self) -> Result<(Vec<Problem>, SuccessCriterion)> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config(format!("invalid campaign name `{}`", self.name)));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be at least 1"));
        }
        let problems = self.build_problems()?;
        if problems.is_empty() {
            return Err(Error::config("no problems configured"));
        }
        match self.mode {
            Mode::Random => {
                self.ranges.validate()?;
                if self.n_trials < 1 {
                    return Err(Error::config("n_trials must be at least 1"));
                }
            }
            Mode::Sweep => {
                self.ranges.validate()?;
                if self.n_sets < 1 {
                    return Err(Error::config("n_sets must be at least 1"));
                }
            }
            Mode::Meta => self.meta.validate()?,
            Mode::Baseline => {
                let b = self
                    .baseline
                    .as_ref()
                    .ok_or_else(|| Error::config("baseline mode needs a [baseline] table"))?;
                if b.k < 1 || b.top < 1 {
                    return Err(Error::config("baseline top and k must be at least 1"));
                }
            }
        }
        let criterion = SuccessCriterion::from_problems(&problems);
        Ok((problems, criterion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DESK: &str = r#"
mode = "random"
name = "desk"
seed = 7
n_trials = 5
ranges = "desk"

[[problems]]
kind = "quartic"
points = 20

[[problems]]
kind = "parity"
bits = 5
threshold = 0.9

[[problems]]
kind = "multiplexer"
addr_bits = 2
"#;

    #[test]
    fn parses_and_resolves_thresholds() {
        let c = ExperimentConfig::from_toml(DESK).unwrap();
        assert_eq!(c.ranges, ParameterRanges::DESK);
        assert_eq!(c.out_dir, PathBuf::from("results"));
        let (problems, criterion) = c.validate().unwrap();
        assert_eq!(problems.len(), 3);
        assert_eq!(criterion.threshold("parity-5"), Some(0.9));
        assert_eq!(criterion.threshold("quartic"), Some(0.97));
    }

    #[test]
    fn explicit_ranges_and_meta_table() {
        let text = r#"
mode = "meta"
name = "m"
[[problems]]
kind = "parity"
bits = 3
[meta]
meta_pop_size = 20
meta_generations = 2
gene_ranges = { pop_size = [100, 200], generations = [5, 10], crossover_rate = [0.0, 1.0], mutation_rate = [0.0, 1.0], tournament_size = [3, 10] }
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.meta.meta_pop_size, 20);
        assert_eq!(c.meta.gene_ranges.generations.hi, 10);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("mode = \"random\"\nname = \"x\"\nbogus = 1\nproblems = []").is_err());
        let mut c = ExperimentConfig::from_toml(DESK).unwrap();
        c.problems.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::from_toml(DESK).unwrap();
        c.problems.push(c.problems[0].clone());
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::from_toml(DESK).unwrap();
        c.mode = Mode::Baseline;
        assert!(c.validate().is_err());
    }

    #[test]
    fn stored_copy_omits_machine_settings() {
        let mut c = ExperimentConfig::from_toml(DESK).unwrap();
        c.workers = Some(3);
        c.out_dir = PathBuf::from("/elsewhere");
        let json = serde_json::to_string(&c).unwrap();
        assert!(!json.contains("workers") && !json.contains("elsewhere"));
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.workers, None);
        assert_eq!(back.ranges, c.ranges);
    }
}
