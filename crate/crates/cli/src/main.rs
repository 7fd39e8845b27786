//! `neurem` — simulate radio maps, recover wideband spectra from
//! multi-coset sub-Nyquist samples, complete sparse maps, and report
//! metrics, all from one seeded JSON config.
//!
//! Exit codes: 0 success, 2 config/validation error, 3 numerical abort.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "neurem", version, about)]
struct Cli {
    /// JSON pipeline config; the built-in demo scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run directory.
    #[arg(long, global = true, default_value = "run")]
    out: PathBuf,

    /// Worker threads (defaults to NEUREM_JOBS, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the ground-truth 4-D map, sensor mask and band plan.
    Simulate,
    /// Monte-Carlo spectrum recovery from sub-Nyquist measurements.
    Spectrum {
        /// Also run the greedy-search baseline on every trial.
        #[arg(long, value_parser = ["somp"])]
        baseline: Option<String>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Complete each frequency's 3-D map from the masked observations.
    Complete,
    /// Aggregate metrics and render PPM heatmaps.
    Report,
    /// All four stages in sequence.
    Pipeline {
        #[arg(long, value_parser = ["somp"])]
        baseline: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let jobs = cli.jobs.or_else(|| {
        std::env::var("NEUREM_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(jobs) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("warning: could not size worker pool: {e}");
        }
    }

    let mut config = match commands::load_config(cli.config.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.exit_code);
        }
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }

    let result = match &cli.command {
        Command::Simulate => commands::cmd_simulate(&config, &cli.out),
        Command::Spectrum { baseline, trials } => {
            commands::cmd_spectrum(&config, &cli.out, baseline.is_some(), *trials)
        }
        Command::Complete => commands::cmd_complete(&config, &cli.out),
        Command::Report => commands::cmd_report(&config, &cli.out),
        Command::Pipeline { baseline, trials } => {
            commands::cmd_pipeline(&config, &cli.out, baseline.is_some(), *trials)
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code)
        }
    }
}
