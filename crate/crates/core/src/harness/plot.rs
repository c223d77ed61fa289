//! Hand-written SVG plots of successful parameter sets. Axes span the
//! campaign's configured ranges rather than the data, so plots from
//! different campaigns line up. Every data point is drawn as an element of
//! class `mark` (scatter) or `bar` (histogram) carrying its values in
//! `data-*` attributes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::Mode;
use crate::harness::records::{read_records, RecordFile};
use crate::params::{Interval, ParameterRanges, ParameterSet};
use crate::random_search::SweepRecord;

pub const PLOT_KINDS: [&str; 5] = ["pop_hist", "gen_hist", "pop_gen_scatter", "xo_mu_scatter", "tour_hist"];

pub const NO_SUCCESS_NOTE: &str = "no successful sets";

const W: f64 = 480.0;
const H: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const MAX_BINS: u32 = 28;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64) -> Axis {
        if hi > lo {
            Axis { lo, hi }
        } else {
            Axis { lo: lo - 0.5, hi: hi + 0.5 }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

struct Plot {
    svg: String,
    x: Axis,
    y: Axis,
}

fn tick_label(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

impl Plot {
    fn new(title: &str, x: Axis, x_label: &str, y: Axis, y_label: &str) -> Plot {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let mut p = Plot { svg, x, y };
        let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
        let _ = writeln!(
            p.svg,
            r##"<g class="axes" stroke="#333"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"##
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x.lo + t * (x.hi - x.lo);
            let px = p.px(xv);
            let _ = writeln!(
                p.svg,
                r#"<text class="tick" x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + 16.0,
                tick_label(xv)
            );
            let yv = y.lo + t * (y.hi - y.lo);
            let py = p.py(yv);
            let _ = writeln!(
                p.svg,
                r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                py + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            p.svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            H - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            p.svg,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
        p
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.frac(v) * (W - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        H - BOTTOM - self.y.frac(v) * (H - TOP - BOTTOM)
    }

    fn mark(&mut self, x: f64, y: f64, extra: &str) {
        let (cx, cy) = (self.px(x), self.py(y));
        let _ = writeln!(
            self.svg,
            r##"<circle class="mark" data-x="{x}" data-y="{y}"{extra} cx="{cx:.2}" cy="{cy:.2}" r="3" fill="#1f77b4" fill-opacity="0.7"/>"##
        );
    }

    fn bar(&mut self, lo: f64, hi: f64, count: usize) {
        let (x0, x1) = (self.px(lo), self.px(hi));
        let (y0, y1) = (self.py(0.0), self.py(count as f64));
        let _ = writeln!(
            self.svg,
            r##"<rect class="bar" data-lo="{lo}" data-hi="{hi}" data-count="{count}" x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white"/>"##,
            (x1 - x0).max(0.0),
            (y0 - y1).max(0.0)
        );
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(
            self.svg,
            r##"<text class="note" x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14" fill="#a00">{}</text>"##,
            (LEFT + W - RIGHT) / 2.0,
            (TOP + H - BOTTOM) / 2.0,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

/// Histogram of integer values over `range`: one bin per value when the
/// range holds at most [`MAX_BINS`] values, otherwise `MAX_BINS` equal bins.
/// Bin `i` covers `[lo + i*w, lo + (i+1)*w)` on the real line `[lo, hi + 1)`.
pub fn int_histogram(values: &[u32], range: Interval<u32>) -> Vec<(f64, f64, usize)> {
    let span = (range.hi - range.lo + 1) as f64;
    let bins = (range.hi - range.lo + 1).min(MAX_BINS) as usize;
    let w = span / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if range.contains(v) {
            let i = (((v - range.lo) as f64 / w) as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (range.lo as f64 + i as f64 * w, range.lo as f64 + (i + 1) as f64 * w, c))
        .collect()
}

fn histogram_svg(title: &str, label: &str, values: &[u32], range: Interval<u32>) -> String {
    let bins = int_histogram(values, range);
    let top = bins.iter().map(|b| b.2).max().unwrap_or(0).max(1);
    let mut p = Plot::new(
        title,
        Axis::new(range.lo as f64, range.hi as f64 + 1.0),
        label,
        Axis::new(0.0, top as f64),
        "successful sets",
    );
    for (lo, hi, c) in bins {
        p.bar(lo, hi, c);
    }
    if values.is_empty() {
        p.note(NO_SUCCESS_NOTE);
    }
    p.finish()
}

fn scatter_svg(title: &str, labels: (&str, &str), points: &[(f64, f64)], xr: (f64, f64), yr: (f64, f64)) -> String {
    let mut p = Plot::new(title, Axis::new(xr.0, xr.1), labels.0, Axis::new(yr.0, yr.1), labels.1);
    for &(x, y) in points {
        p.mark(x, y, "");
    }
    if points.is_empty() {
        p.note(NO_SUCCESS_NOTE);
    }
    p.finish()
}

/// The five plots of a set of successful parameter sets, keyed by kind.
pub fn parameter_plots(campaign: &str, sets: &[ParameterSet], ranges: &ParameterRanges) -> Vec<(&'static str, String)> {
    let r = ranges;
    let pops: Vec<u32> = sets.iter().map(|s| s.pop_size).collect();
    let gens: Vec<u32> = sets.iter().map(|s| s.generations).collect();
    let tours: Vec<u32> = sets.iter().map(|s| s.tournament_size).collect();
    let pop_gen: Vec<(f64, f64)> = sets.iter().map(|s| (s.pop_size as f64, s.generations as f64)).collect();
    let xo_mu: Vec<(f64, f64)> = sets.iter().map(|s| (s.crossover_rate, s.mutation_rate)).collect();
    let fr = |i: Interval<u32>| (i.lo as f64, i.hi as f64);
    vec![
        ("pop_hist", histogram_svg(&format!("{campaign}: population size"), "population size", &pops, r.pop_size)),
        ("gen_hist", histogram_svg(&format!("{campaign}: generations"), "generations", &gens, r.generations)),
        (
            "pop_gen_scatter",
            scatter_svg(
                &format!("{campaign}: population vs generations"),
                ("population size", "generations"),
                &pop_gen,
                fr(r.pop_size),
                fr(r.generations),
            ),
        ),
        (
            "xo_mu_scatter",
            scatter_svg(
                &format!("{campaign}: crossover vs mutation"),
                ("crossover rate", "mutation rate"),
                &xo_mu,
                (r.crossover_rate.lo, r.crossover_rate.hi),
                (r.mutation_rate.lo, r.mutation_rate.hi),
            ),
        ),
        ("tour_hist", histogram_svg(&format!("{campaign}: tournament size"), "tournament size", &tours, r.tournament_size)),
    ]
}

/// Best fitness of every set of one problem's sweep, highest first.
pub fn sweep_svg(campaign: &str, problem: &str, records: &[&SweepRecord]) -> String {
    let mut sorted: Vec<&SweepRecord> = records.to_vec();
    sorted.sort_by(|a, b| b.best_fitness.total_cmp(&a.best_fitness).then(a.set.cmp(&b.set)));
    let mut p = Plot::new(
        &format!("{campaign}: {problem} best fitness per set"),
        Axis::new(1.0, sorted.len().max(1) as f64),
        "parameter set (by rank)",
        Axis::new(0.0, 1.0),
        "best fitness",
    );
    for (rank, r) in sorted.iter().enumerate() {
        p.mark((rank + 1) as f64, r.best_fitness, &format!(r#" data-set="{}""#, r.set));
    }
    if sorted.is_empty() {
        p.note("no sets");
    }
    p.finish()
}

fn file_part(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Parameter sets counted as successful, and the ranges to plot them on.
fn successful_sets(rf: &RecordFile) -> Result<(Vec<ParameterSet>, ParameterRanges)> {
    let config = &rf.header.as_ref().expect("checked by caller").config;
    Ok(match config.mode {
        Mode::Random => (rf.trials().filter(|t| t.success).map(|t| t.params).collect(), config.ranges),
        Mode::Baseline => (rf.baselines().map(|b| b.params).collect(), config.ranges),
        Mode::Sweep => {
            let problems = config.build_problems()?;
            let sets = rf
                .sweeps()
                .filter(|s| {
                    s.error.is_none()
                        && problems
                            .iter()
                            .any(|p| p.name == s.problem && s.best_fitness >= p.success_threshold)
                })
                .map(|s| s.params)
                .collect();
            (sets, config.ranges)
        }
        Mode::Meta => {
            let problems = config.build_problems()?;
            let sets = rf
                .generations()
                .last()
                .map(|g| {
                    g.population
                        .iter()
                        .filter(|s| {
                            s.evaluation.valid
                                && problems
                                    .iter()
                                    .all(|p| s.evaluation.per_problem.get(&p.name).is_some_and(|&f| f >= p.success_threshold))
                        })
                        .map(|s| s.genome)
                        .collect()
                })
                .unwrap_or_default();
            (sets, config.meta.gene_ranges)
        }
    })
}

/// Writes `<campaign>_<kind>.svg` for each of [`PLOT_KINDS`], plus
/// `<campaign>_sweep_<problem>.svg` per problem for sweeps.
pub fn emit_plots(results_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rf = read_records(results_path)?;
    let Some(header) = &rf.header else {
        return Err(Error::Ingest {
            path: results_path.to_path_buf(),
            message: "no header record".into(),
        });
    };
    let campaign = file_part(&header.config.name);
    std::fs::create_dir_all(out_dir)?;
    let (sets, ranges) = successful_sets(&rf)?;
    let mut written = Vec::new();
    for (kind, svg) in parameter_plots(&header.config.name, &sets, &ranges) {
        let path = out_dir.join(format!("{campaign}_{kind}.svg"));
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    if header.config.mode == Mode::Sweep {
        let mut names: Vec<&str> = rf.sweeps().map(|s| s.problem.as_str()).collect();
        names.dedup();
        for name in names {
            let recs: Vec<&SweepRecord> = rf.sweeps().filter(|s| s.problem == name).collect();
            let path = out_dir.join(format!("{campaign}_sweep_{}.svg", file_part(name)));
            std::fs::write(&path, sweep_svg(&header.config.name, name, &recs))?;
            written.push(path);
        }
    }
    Ok(written)
}
