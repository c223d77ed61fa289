use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::Result;
use crate::harness::config::Mode;
use crate::harness::records::{read_records, Record};

/// Quantile of ascending `sorted` at `q` in `[0, 1]`, interpolating
/// linearly between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Minimum, quartiles and maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantiles {
    pub count: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Quantiles> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Quantiles {
            count: v.len(),
            min: quantile(&v, 0.0)?,
            q25: quantile(&v, 0.25)?,
            median: quantile(&v, 0.5)?,
            q75: quantile(&v, 0.75)?,
            max: quantile(&v, 1.0)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryReport {
    pub campaign: Option<String>,
    pub mode: Option<Mode>,
    pub total: usize,
    pub successes: usize,
    /// Lines that could not be parsed.
    pub skipped: usize,
    pub per_problem: BTreeMap<String, Quantiles>,
    pub best_fitness: Option<f64>,
    pub solutions_tested: Option<u64>,
    pub complete: bool,
}

impl SummaryReport {
    pub fn yield_percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.successes as f64 / self.total as f64
        }
    }
}

impl fmt::Display for SummaryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.campaign {
            writeln!(f, "campaign {c}")?;
        }
        write!(f, "total {}, successes {}", self.total, self.successes)?;
        if self.total > 0 {
            write!(f, ", yield {:.1}%", self.yield_percent())?;
        }
        writeln!(f)?;
        if let Some(n) = self.solutions_tested {
            writeln!(f, "random solutions tested {n}")?;
        }
        if let Some(b) = self.best_fitness {
            writeln!(f, "best fitness {b:.6}")?;
        }
        for (name, q) in &self.per_problem {
            writeln!(
                f,
                "{name}: n {} min {:.4} q25 {:.4} median {:.4} q75 {:.4} max {:.4}",
                q.count, q.min, q.q25, q.median, q.q75, q.max
            )?;
        }
        if !self.complete {
            writeln!(f, "unfinished (no summary record)")?;
        }
        if self.skipped > 0 {
            writeln!(f, "warning: skipped {} unreadable lines", self.skipped)?;
        }
        Ok(())
    }
}

/// Counts records and collects per-problem fitness quantiles. For
/// baselines, `total` counts tested sets and `successes` counts random
/// solutions that passed.
pub fn summarize(path: &Path) -> Result<SummaryReport> {
    let rf = read_records(path)?;
    let config = rf.header.as_ref().map(|h| &h.config);
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut report = SummaryReport {
        campaign: config.map(|c| c.name.clone()),
        mode: config.map(|c| c.mode),
        total: 0,
        successes: 0,
        skipped: rf.corrupt + rf.partial_tail as usize,
        per_problem: BTreeMap::new(),
        best_fitness: None,
        solutions_tested: None,
        complete: rf.summary.is_some(),
    };
    let thresholds: BTreeMap<String, f64> = config
        .and_then(|c| c.build_problems().ok())
        .unwrap_or_default()
        .into_iter()
        .map(|p| (p.name, p.success_threshold))
        .collect();
    let last_generation = rf.generations().last().map(|g| g.generation);
    for r in &rf.body {
        report.total += 1;
        match r {
            Record::Trial(t) => {
                report.successes += t.success as usize;
                for (k, v) in &t.per_problem_fitness {
                    values.entry(k.clone()).or_default().push(*v);
                }
            }
            Record::Sweep(s) => {
                let t = thresholds.get(&s.problem).copied().unwrap_or(f64::INFINITY);
                report.successes += (s.error.is_none() && s.best_fitness >= t) as usize;
                values.entry(s.problem.clone()).or_default().push(s.best_fitness);
                report.best_fitness = Some(report.best_fitness.unwrap_or(0.0f64).max(s.best_fitness));
            }
            Record::MetaGeneration(g) => {
                report.best_fitness = Some(g.best_fitness);
                if Some(g.generation) == last_generation {
                    for s in g.population.iter().filter(|s| s.evaluation.valid) {
                        for (k, v) in &s.evaluation.per_problem {
                            values.entry(k.clone()).or_default().push(*v);
                        }
                    }
                }
            }
            Record::Baseline(b) => {
                report.successes += b.outcome.passes as usize;
                *report.solutions_tested.get_or_insert(0) += b.outcome.solutions_tested;
            }
            Record::Header(_) | Record::Summary(_) => report.total -= 1,
        }
    }
    report.per_problem = values
        .into_iter()
        .filter_map(|(k, v)| Some((k, Quantiles::of(&v)?)))
        .collect();
    Ok(report)
}
