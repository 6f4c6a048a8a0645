use std::path::PathBuf;
use std::process::ExitCode;

use chainsim::config::{defaults_text, parse_config};
use chainsim::run_experiment;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chainsim", version, about = "Service chain placement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write results.csv, summary.csv and optional figures.
    Run {
        #[arg(long, required_unless_present = "print_defaults")]
        config: Option<PathBuf>,
        /// Output directory (overrides run.out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG figures.
        #[arg(long)]
        plots: bool,
        /// Use seeds 1..=N (overrides run.seeds).
        #[arg(long)]
        seeds: Option<u64>,
        /// Print every config key with its default and exit.
        #[arg(long)]
        print_defaults: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, out, plots, seeds, print_defaults } = Cli::parse().command;
    if print_defaults {
        print!("{}", defaults_text());
        return ExitCode::SUCCESS;
    }
    let Some(path) = config else {
        eprintln!("error: --config is required");
        return ExitCode::from(1);
    };
    let mut cfg = match parse_config(&path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    };
    if let Some(dir) = out {
        cfg.run.out_dir = dir;
    }
    if plots {
        cfg.run.plots = true;
    }
    if let Some(n) = seeds {
        if n == 0 {
            eprintln!("error: --seeds must be at least 1");
            return ExitCode::from(1);
        }
        cfg.run.seeds = (1..=n).collect();
    }
    match run_experiment(&cfg) {
        Ok(run) => {
            for f in &run.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
