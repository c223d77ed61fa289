use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::harness::records::{read_records, BaselineRecord, Header, Record, ResultsWriter, RunSummary, SCHEMA_VERSION};
use crate::meta::{MetaGa, MetaGeneration};
use crate::metrics::SuccessCriterion;
use crate::random_search::{
    ordered_for_each, random_baseline, run_campaign_with, sweep_set, CampaignRecord, CampaignSummary,
};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Stop once the file holds this many records (header and summary not
    /// counted), leaving the experiment unfinished.
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub results_path: PathBuf,
    /// Records in the file, including any written before a resume.
    pub records: usize,
    /// Records computed by this invocation.
    pub computed: usize,
    pub complete: bool,
    pub summary: Option<RunSummary>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// The successful trials of a campaign, best mean fitness first.
pub fn top_successful(trials: &[CampaignRecord], top: usize) -> Vec<&CampaignRecord> {
    let mean = |r: &CampaignRecord| r.per_problem_fitness.values().sum::<f64>() / r.per_problem_fitness.len().max(1) as f64;
    let mut ok: Vec<&CampaignRecord> = trials.iter().filter(|r| r.success).collect();
    ok.sort_by(|a, b| mean(b).total_cmp(&mean(a)).then(a.trial.cmp(&b.trial)));
    ok.truncate(top);
    ok
}

fn summarize_body(config: &ExperimentConfig, criterion: &SuccessCriterion, body: &[Record]) -> RunSummary {
    let mut total = 0;
    let mut successes = 0;
    let mut best_fitness = None;
    let mut solutions_tested = None;
    for r in body {
        total += 1;
        match r {
            Record::Trial(t) => successes += t.success as usize,
            Record::Sweep(s) => {
                let t = criterion.threshold(&s.problem).unwrap_or(config.threshold);
                successes += (s.error.is_none() && s.best_fitness >= t) as usize;
                best_fitness = Some(best_fitness.unwrap_or(0.0f64).max(s.best_fitness));
            }
            Record::MetaGeneration(g) => best_fitness = Some(g.best_fitness),
            Record::Baseline(b) => {
                successes += b.outcome.passes as usize;
                *solutions_tested.get_or_insert(0) += b.outcome.solutions_tested;
            }
            Record::Header(_) | Record::Summary(_) => total -= 1,
        }
    }
    let yield_percent = match config.mode {
        Mode::Baseline => match solutions_tested {
            Some(n) if n > 0 => 100.0 * successes as f64 / n as f64,
            _ => 0.0,
        },
        _ => 100.0 * CampaignSummary { total, successes }.yield_fraction(),
    };
    RunSummary {
        mode: config.mode,
        total,
        successes,
        yield_percent,
        best_fitness,
        solutions_tested,
    }
}

/// Runs an experiment, streaming records to `<out_dir>/<name>.results.jsonl`.
/// An existing file for the same config is resumed: finished records are
/// kept and only the missing ones are computed.
pub fn run_experiment(config: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutcome> {
    let (problems, criterion) = config.validate()?;
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", config.out_dir.display())))?;
    let path = config.results_path();
    let header = Header {
        schema: SCHEMA_VERSION,
        config: config.clone(),
    };
    let header_json = serde_json::to_value(&header.config)?;

    let (existing, keep) = if path.exists() {
        let rf = read_records(&path)?;
        match &rf.header {
            Some(h) if h.schema == SCHEMA_VERSION && serde_json::to_value(&h.config)? == header_json => {}
            Some(_) => {
                return Err(Error::Config(format!(
                    "{} was written by a different config; remove it or change the campaign name",
                    path.display()
                )))
            }
            None if rf.body.is_empty() && rf.summary.is_none() => {}
            None => return Err(Error::Config(format!("{} has no header", path.display()))),
        }
        if rf.corrupt > 0 {
            return Err(Error::Config(format!(
                "{} has unreadable lines {:?}; refusing to resume",
                path.display(),
                rf.corrupt_lines
            )));
        }
        if let Some(summary) = rf.summary {
            return Ok(ExperimentOutcome {
                results_path: path,
                records: rf.body.len(),
                computed: 0,
                complete: true,
                summary: Some(summary),
            });
        }
        let keep = if rf.header.is_some() { rf.valid_len } else { 0 };
        (rf.body, keep)
    } else {
        (Vec::new(), 0)
    };

    check_existing(config.mode, &existing)?;
    let mut writer = ResultsWriter::open(&path, keep)?;
    if keep == 0 {
        writer.append(&Record::Header(header))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let done = existing.len();
    let cap = |n: usize| opts.limit.map_or(n, |l| l.min(n)).max(done);
    let mut fresh = Vec::new();
    let mut sink = |r: Record| -> Result<()> {
        writer.append(&r)?;
        fresh.push(r);
        Ok(())
    };

    let complete = pool.install(|| -> Result<bool> {
        match config.mode {
            Mode::Random => {
                let end = cap(config.n_trials);
                let stamp = config.timestamps;
                run_campaign_with(&problems, &config.ranges, &criterion, done..end, config.seed, config.evolve, |mut r| {
                    if stamp {
                        r.timestamp = Some(unix_now());
                    }
                    sink(Record::Trial(r))
                })?;
                Ok(end == config.n_trials)
            }
            Mode::Sweep => {
                let total = problems.len() * config.n_sets;
                let end = cap(total);
                ordered_for_each(
                    done..end,
                    |i| {
                        let p = i / config.n_sets;
                        let seed = derive_seed(config.seed, p as u64);
                        Ok(sweep_set(&problems[p], &config.ranges, i % config.n_sets, seed, config.evolve))
                    },
                    |r| sink(Record::Sweep(r)),
                )?;
                Ok(end == total)
            }
            Mode::Meta => {
                let history: Vec<MetaGeneration> = existing
                    .iter()
                    .filter_map(|r| match r {
                        Record::MetaGeneration(g) => Some(g.clone()),
                        _ => None,
                    })
                    .collect();
                let mut ga = MetaGa::resume(&problems, config.meta.clone(), config.seed, &history)?;
                let end = cap(config.meta.meta_generations + 1);
                for _ in done..end {
                    sink(Record::MetaGeneration(ga.step()?))?;
                }
                Ok(ga.is_done())
            }
            Mode::Baseline => {
                let b = config.baseline.as_ref().expect("validated");
                let source = read_records(&b.source)?;
                let trials: Vec<CampaignRecord> = source.trials().cloned().collect();
                let chosen = top_successful(&trials, b.top);
                let end = cap(chosen.len());
                ordered_for_each(
                    done..end,
                    |j| {
                        let t = chosen[j];
                        let seed = derive_seed(config.seed, t.trial as u64);
                        Ok(BaselineRecord {
                            trial: t.trial,
                            params: t.params,
                            seed,
                            outcome: random_baseline(&t.params, &problems, &criterion, b.k, seed)?,
                        })
                    },
                    |r| sink(Record::Baseline(r)),
                )?;
                Ok(end == chosen.len())
            }
        }
    })?;

    let mut body = existing;
    body.extend(fresh);
    let summary = if complete {
        let s = summarize_body(config, &criterion, &body);
        writer.append(&Record::Summary(s.clone()))?;
        Some(s)
    } else {
        None
    };
    Ok(ExperimentOutcome {
        results_path: path,
        records: body.len(),
        computed: body.len() - done,
        complete,
        summary,
    })
}

/// Resuming requires the kept records to be exactly the first `n` of this
/// mode, in order.
fn check_existing(mode: Mode, existing: &[Record]) -> Result<()> {
    for (i, r) in existing.iter().enumerate() {
        let ok = match (mode, r) {
            (Mode::Random, Record::Trial(t)) => t.trial == i,
            (Mode::Meta, Record::MetaGeneration(g)) => g.generation == i,
            (Mode::Sweep, Record::Sweep(_)) | (Mode::Baseline, Record::Baseline(_)) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::Config(format!("record {i} of the existing results does not fit a {mode:?} run")));
        }
    }
    Ok(())
}
