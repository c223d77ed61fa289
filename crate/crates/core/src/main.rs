use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paramscan::harness::{
    emit_plots, read_records, run_experiment, summarize, BaselineConfig, ExperimentConfig, Mode, RunOptions,
};
use paramscan::{Error, Result};

/// Random search and meta-evolution over genetic programming hyper-parameters.
#[derive(Parser)]
#[command(name = "paramscan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop after this many records without finishing.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Print counts, yield and per-problem fitness quantiles.
    Summarize { results: PathBuf },
    /// Write SVG plots of the successful parameter sets.
    Plot {
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test random programs against the top successful sets of a campaign.
    Baseline {
        results: PathBuf,
        #[arg(long, default_value_t = 3)]
        top: usize,
        /// Candidate multiplier bound.
        #[arg(long, default_value_t = 5)]
        k: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; defaults to the results file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(config: ExperimentConfig, limit: Option<usize>) -> Result<()> {
    let outcome = run_experiment(&config, RunOptions { limit })?;
    println!("results: {}", outcome.results_path.display());
    println!("records: {} ({} computed now)", outcome.records, outcome.computed);
    match outcome.summary {
        Some(_) => print!("{}", summarize(&outcome.results_path)?),
        None => println!("stopped before completion; rerun the same command to resume"),
    }
    Ok(())
}

fn baseline_config(
    results: &Path,
    top: usize,
    k: u64,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
) -> Result<ExperimentConfig> {
    let rf = read_records(results)?;
    let header = rf.header.ok_or_else(|| Error::Ingest {
        path: results.to_path_buf(),
        message: "no header record".into(),
    })?;
    if header.config.mode != Mode::Random {
        return Err(Error::Config(format!("{} is not a random-search campaign", results.display())));
    }
    let mut config = header.config;
    config.mode = Mode::Baseline;
    config.name = format!("{}_baseline", config.name);
    config.baseline = Some(BaselineConfig {
        source: results.to_path_buf(),
        top,
        k,
    });
    config.seed = seed.unwrap_or(config.seed);
    config.workers = workers;
    config.out_dir = out.unwrap_or_else(|| results.parent().map(Path::to_path_buf).unwrap_or_default());
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
            limit,
        } => ExperimentConfig::load(&config).and_then(|mut c| {
            if let Some(s) = seed {
                c.seed = s;
            }
            if workers.is_some() {
                c.workers = workers;
            }
            if let Some(o) = out {
                c.out_dir = o;
            }
            run(c, limit)
        }),
        Command::Summarize { results } => summarize(&results).map(|r| print!("{r}")),
        Command::Plot { results, out } => emit_plots(&results, &out).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::Baseline {
            results,
            top,
            k,
            seed,
            workers,
            out,
        } => baseline_config(&results, top, k, seed, workers, out).and_then(|c| run(c, None)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
