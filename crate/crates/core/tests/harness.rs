use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use paramscan::harness::records::{Header, Record, ResultsWriter, SCHEMA_VERSION};
use paramscan::harness::summary::quantile;
use paramscan::harness::{
    emit_plots, read_records, run_experiment, summarize, BaselineConfig, ExperimentConfig, Mode, RunOptions,
};
use paramscan::meta::MetaConfig;
use paramscan::problems::{ProblemSource, ProblemSpec};
use paramscan::random_search::CampaignRecord;
use paramscan::{Interval, ParameterRanges, ParameterSet};

fn tiny_ranges() -> ParameterRanges {
    ParameterRanges {
        pop_size: Interval::new(100, 120),
        generations: Interval::new(2, 6),
        crossover_rate: Interval::new(0.0, 1.0),
        mutation_rate: Interval::new(0.0, 1.0),
        tournament_size: Interval::new(3, 7),
    }
}

fn config(mode: Mode, name: &str, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        mode,
        name,
        vec![
            ProblemSpec::new(ProblemSource::Parity { bits: 3 }),
            ProblemSpec::new(ProblemSource::Quartic { points: 10, lo: -1.0, hi: 1.0 }),
        ],
    );
    c.ranges = tiny_ranges();
    c.out_dir = out.to_path_buf();
    c.seed = 3;
    c
}

fn count_types(path: &Path) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for line in std::fs::read_to_string(path).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        *m.entry(v["type"].as_str().unwrap().to_string()).or_default() += 1;
    }
    m
}

#[test]
fn two_trials_give_two_records_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Random, "two", dir.path());
    c.n_trials = 2;
    let out = run_experiment(&c, RunOptions::default()).unwrap();
    assert!(out.complete);
    let types = count_types(&out.results_path);
    assert_eq!(types["trial"], 2);
    assert_eq!(types["summary"], 1);
    assert_eq!(types["header"], 1);

    let report = summarize(&out.results_path).unwrap();
    let s = out.summary.unwrap();
    assert_eq!((report.total, report.successes), (s.total, s.successes));
    assert_eq!(report.per_problem.len(), 2);
}

#[test]
fn resume_skips_finished_trials() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Random, "resume", dir.path());
    c.n_trials = 3;
    let first = run_experiment(&c, RunOptions { limit: Some(1) }).unwrap();
    assert!(!first.complete);
    let kept = std::fs::read_to_string(&first.results_path).unwrap();
    let second = run_experiment(&c, RunOptions::default()).unwrap();
    assert_eq!((second.records, second.computed), (3, 2));
    let full = std::fs::read_to_string(&second.results_path).unwrap();
    assert!(full.starts_with(&kept));

    let other = tempfile::tempdir().unwrap();
    c.out_dir = other.path().to_path_buf();
    let straight = run_experiment(&c, RunOptions::default()).unwrap();
    assert_eq!(std::fs::read(straight.results_path).unwrap(), full.into_bytes());

    // Finished campaigns are left untouched.
    c.out_dir = dir.path().to_path_buf();
    let again = run_experiment(&c, RunOptions::default()).unwrap();
    assert_eq!(again.computed, 0);
}

#[test]
fn resume_refuses_a_different_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Random, "clash", dir.path());
    c.n_trials = 2;
    run_experiment(&c, RunOptions { limit: Some(1) }).unwrap();
    c.seed += 1;
    assert!(run_experiment(&c, RunOptions::default()).is_err());
    // Worker count is not part of the experiment's identity.
    c.seed -= 1;
    c.workers = Some(1);
    assert!(run_experiment(&c, RunOptions::default()).unwrap().complete);
}

#[test]
fn meta_runs_resume_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Meta, "meta", &dir.path().join("a"));
    c.meta = MetaConfig {
        meta_pop_size: 6,
        meta_generations: 4,
        weight_update_period: 2,
        gene_ranges: tiny_ranges(),
        ..MetaConfig::default()
    };
    let whole = run_experiment(&c, RunOptions::default()).unwrap();
    assert_eq!(count_types(&whole.results_path)["meta_generation"], 5);

    c.out_dir = dir.path().join("b");
    run_experiment(&c, RunOptions { limit: Some(3) }).unwrap();
    let resumed = run_experiment(&c, RunOptions::default()).unwrap();
    assert_eq!(resumed.computed, 2);
    assert_eq!(
        std::fs::read(whole.results_path).unwrap(),
        std::fs::read(resumed.results_path).unwrap()
    );
}

#[test]
fn sweep_writes_problems_times_sets_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Sweep, "sweep", dir.path());
    c.n_sets = 4;
    let out = run_experiment(&c, RunOptions::default()).unwrap();
    assert_eq!(count_types(&out.results_path)["sweep"], 8);
    let plots = emit_plots(&out.results_path, &dir.path().join("plots")).unwrap();
    assert_eq!(plots.len(), 7);
    assert!(plots.iter().any(|p| p.ends_with("sweep_sweep_parity-3.svg")));
    let svg = std::fs::read_to_string(dir.path().join("plots/sweep_sweep_quartic.svg")).unwrap();
    assert_eq!(svg.matches("class=\"mark\"").count(), 4);
}

#[test]
fn baseline_mode_reads_a_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Random, "src", dir.path());
    c.n_trials = 3;
    c.threshold = 0.0;
    let src = run_experiment(&c, RunOptions::default()).unwrap();
    let mut b = c.clone();
    b.mode = Mode::Baseline;
    b.name = "base".into();
    b.baseline = Some(BaselineConfig {
        source: src.results_path.clone(),
        top: 2,
        k: 2,
    });
    let out = run_experiment(&b, RunOptions::default()).unwrap();
    let rf = read_records(&out.results_path).unwrap();
    let recs: Vec<_> = rf.baselines().collect();
    assert_eq!(recs.len(), 2);
    // A vacuous criterion passes every random candidate.
    for r in recs {
        assert_eq!(r.outcome.passes, r.outcome.solutions_tested);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Random, "bad", dir.path());
    c.n_trials = 0;
    assert!(run_experiment(&c, RunOptions::default()).is_err());
    let mut c = config(Mode::Random, "bad", dir.path());
    c.problems.push(ProblemSpec::new(ProblemSource::Bundled { dataset: "nope".into() }));
    assert!(run_experiment(&c, RunOptions::default()).is_err());
    assert!(!dir.path().join("bad.results.jsonl").exists());
}

fn fixture_trial(i: usize, fitness: f64, success: bool) -> Record {
    Record::Trial(CampaignRecord {
        trial: i,
        params: ParameterSet {
            pop_size: 100 + i as u32,
            generations: 100,
            crossover_rate: 0.5,
            mutation_rate: 0.5,
            tournament_size: 3,
        },
        per_problem_fitness: BTreeMap::from([("parity-3".to_string(), fitness)]),
        success,
        seeds: BTreeMap::from([("parity-3".to_string(), 1)]),
        error: None,
        timestamp: None,
    })
}

fn write_fixture(path: &Path, records: &[Record]) {
    let c = ExperimentConfig::new(Mode::Random, "fx", vec![ProblemSpec::new(ProblemSource::Parity { bits: 3 })]);
    let mut w = ResultsWriter::open(path, 0).unwrap();
    w.append(&Record::Header(Header { schema: SCHEMA_VERSION, config: c })).unwrap();
    for r in records {
        w.append(r).unwrap();
    }
}

#[test]
fn summary_counts_and_yield() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fx.results.jsonl");
    let recs: Vec<Record> = (0..10).map(|i| fixture_trial(i, 0.5, i < 3)).collect();
    write_fixture(&path, &recs);
    let r = summarize(&path).unwrap();
    assert!(r.to_string().contains("total 10, successes 3, yield 30.0%"), "{r}");

    std::fs::write(&path, "").unwrap();
    let r = summarize(&path).unwrap();
    assert!(r.to_string().contains("total 0"));
}

#[test]
fn summary_quantiles_match_sorted_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fx.results.jsonl");
    let fits: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 / 100.0 + 0.001 * i as f64).collect();
    let recs: Vec<Record> = fits.iter().enumerate().map(|(i, &f)| fixture_trial(i, f, false)).collect();
    write_fixture(&path, &recs);
    let mut sorted = fits.clone();
    sorted.sort_by(f64::total_cmp);
    // Brute force: position (n-1)q between neighbouring order statistics.
    let brute = |q: f64| {
        let pos = 99.0 * q;
        let i = pos as usize;
        if i >= 99 {
            sorted[99]
        } else {
            sorted[i] * (1.0 - (pos - i as f64)) + sorted[i + 1] * (pos - i as f64)
        }
    };
    let q = summarize(&path).unwrap().per_problem["parity-3"];
    assert_eq!(q.count, 100);
    assert_eq!(q.min, sorted[0]);
    assert_eq!(q.max, sorted[99]);
    for (got, p) in [(q.q25, 0.25), (q.median, 0.5), (q.q75, 0.75)] {
        assert!((got - brute(p)).abs() < 1e-12, "{got} vs {}", brute(p));
    }
    assert_eq!(quantile(&sorted, 0.5), Some(q.median));
}

#[test]
fn corrupt_lines_are_skipped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fx.results.jsonl");
    write_fixture(&path, &[fixture_trial(0, 1.0, true), fixture_trial(1, 0.2, false)]);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{garbage}\n{\"type\":\"trial\"}\n");
    std::fs::write(&path, text).unwrap();
    let r = summarize(&path).unwrap();
    assert_eq!((r.total, r.successes, r.skipped), (2, 1, 2));
    assert!(r.to_string().contains("skipped 2"));
}

#[test]
fn zero_successes_give_annotated_plots() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fx.results.jsonl");
    write_fixture(&path, &[fixture_trial(0, 0.1, false)]);
    let files = emit_plots(&path, &dir.path().join("p")).unwrap();
    assert_eq!(files.len(), 5);
    for f in files {
        let svg = std::fs::read_to_string(&f).unwrap();
        assert!(svg.contains("no successful sets"), "{}", f.display());
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn plot_axes_follow_the_configured_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fx.results.jsonl");
    write_fixture(&path, &[fixture_trial(0, 1.0, true)]);
    emit_plots(&path, dir.path()).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("fx_pop_gen_scatter.svg")).unwrap();
    let ticks: Vec<&str> = svg
        .lines()
        .filter(|l| l.contains("class=\"tick\""))
        .map(|l| l.split('>').nth(1).unwrap().trim_end_matches("</text"))
        .collect();
    // Default campaign ranges: population and generations both span 100..1000.
    assert!(ticks.contains(&"100") && ticks.contains(&"1000"), "{ticks:?}");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paramscan"))
}

#[test]
fn cli_run_summarize_plot_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        r#"
mode = "random"
name = "cli"
n_trials = 2
threshold = 0.0
ranges = { pop_size = [100, 100], generations = [2, 3], crossover_rate = [0.0, 1.0], mutation_rate = [0.0, 1.0], tournament_size = [3, 5] }

[[problems]]
kind = "parity"
bits = 3
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = bin()
        .args(["run", cfg.to_str().unwrap(), "--seed", "4", "--workers", "1", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let results = out.join("cli.results.jsonl");
    let sum = bin().args(["summarize", results.to_str().unwrap()]).output().unwrap();
    assert!(String::from_utf8_lossy(&sum.stdout).contains("total 2, successes 2, yield 100.0%"));
    let plot = bin()
        .args(["plot", results.to_str().unwrap(), "--out", dir.path().join("plots").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(plot.status.success());
    assert_eq!(std::fs::read_dir(dir.path().join("plots")).unwrap().count(), 5);
    let base = bin()
        .args(["baseline", results.to_str().unwrap(), "--top", "1", "--k", "1"])
        .output()
        .unwrap();
    assert!(base.status.success(), "{}", String::from_utf8_lossy(&base.stderr));
    assert!(out.join("cli_baseline.results.jsonl").exists());
}

#[test]
fn cli_reports_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "mode = \"random\"\nname = \"x\"\nproblems = []\n").unwrap();
    let run = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("error"));
    let missing = bin().args(["summarize", "/nonexistent/file.jsonl"]).output().unwrap();
    assert!(!missing.status.success());
}
