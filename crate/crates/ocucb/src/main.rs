//! `ocucb` command line: `run` executes a config file, `plot` renders
//! summary CSVs as an SVG.
//!
//! Exit codes: 0 success (all concentration checks passed), 1 at least one
//! check failed, 2 configuration/usage/IO error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ocucb::config::FileConfig;
use ocucb::plot::{self, EnvelopeSpec};
use ocucb::runner;
use ocucb::Error;

/// Environment variable consulted for the worker thread count when
/// `--threads` is not given.
const THREADS_ENV: &str = "OCUCB_THREADS";

#[derive(Parser)]
#[command(
    name = "ocucb",
    version,
    about = "Bandit index-policy simulation, regret envelopes, and concentration checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment and concentration checks in a config file
    Run {
        /// TOML config file
        config: PathBuf,
        /// Output directory for CSV results and the manifest
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (overrides OCUCB_THREADS; default: all cores)
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config's master seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render an SVG regret plot from summary CSVs
    Plot {
        /// Summary CSV files produced by `run`
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output SVG file (a <name>.values.csv sidecar is written too)
        #[arg(long)]
        out: PathBuf,
        /// Envelope overlay, e.g. "arms=10;gap=0.3;eta=2;upper-c=1.2;lower"
        #[arg(long)]
        envelopes: Option<String>,
    },
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, Error> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(raw) => raw.parse().map_err(|_| {
            Error::Config(format!("invalid {THREADS_ENV} value '{raw}' (expected an integer)"))
        }),
        Err(_) => Ok(0), // rayon default: one worker per core
    }
}

fn do_run(
    config_path: &Path,
    out_dir: &Path,
    threads: Option<usize>,
    seed: Option<u64>,
) -> Result<runner::RunOutcome, Error> {
    let mut config = FileConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(threads)?)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| runner::execute_run(&config, out_dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, threads, seed } => {
            match do_run(&config, &out, threads, seed) {
                Ok(outcome) => {
                    for line in &outcome.check_lines {
                        println!("{line}");
                    }
                    println!(
                        "wrote {} output file(s) to {} in {:.1}s (config {})",
                        outcome.manifest.outputs.len(),
                        out.display(),
                        outcome.manifest.duration_seconds,
                        &outcome.manifest.config_hash[..12],
                    );
                    if outcome.all_passed {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("error: at least one concentration check failed");
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Plot { inputs, out, envelopes } => {
            let result = envelopes
                .as_deref()
                .map(EnvelopeSpec::parse)
                .transpose()
                .and_then(|spec| plot::render_plot(&inputs, spec.as_ref(), &out));
            match result {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
