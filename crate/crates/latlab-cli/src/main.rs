//! `latlab` — deterministic experiment runner for the lattice
//! laboratory.

use clap::{Parser, Subcommand};
use latlab_cli::{explain, parse_config, run_config, CliError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "latlab",
    version,
    about = "Exact experiments on lattices in restricted products of finite affine groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every task of an experiment config and write the report.
    Run {
        /// Path to the experiment config file.
        config: PathBuf,
        /// Output directory for the report and traces (default: current
        /// directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent cells (default: one per core).
        #[arg(long)]
        jobs: Option<usize>,
        /// Seed for the heuristic searches.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Describe a task and the meaning of its certificates.
    Explain {
        /// Task name (classify, covolume, gamma, commensurate, serre,
        /// spectrum, folner, ergodicity, witnesses).
        task: String,
    },
    /// Print the artifact version.
    Version,
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Run {
            config,
            out,
            jobs,
            seed,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::config(format!("cannot read {}: {e}", config.display()))
            })?;
            let cfg = parse_config(&text)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("."));
            let outcome = run_config(&cfg, &out_dir, jobs, seed)?;
            println!("report: {}", outcome.report_path.display());
            for (path, _) in &outcome.trace_files {
                println!("trace: {}", path.display());
            }
            Ok(())
        }
        Cmd::Explain { task } => {
            let text = explain::explain(&task)?;
            println!("{text}");
            Ok(())
        }
        Cmd::Version => {
            println!("latlab {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli.cmd) {
        eprintln!("latlab: {err}");
        std::process::exit(err.code);
    }
}
