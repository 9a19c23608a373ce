use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use smcmc_core::par::with_threads;
use smcmc_core::ExecPolicy;
use smcmc_tool::config::load_config;
use smcmc_tool::report::Manifest;
use smcmc_tool::run::{execute, output_dir, RunOptions};
use smcmc_tool::summarize::summarize;
use smcmc_tool::verify::verify;

#[derive(Parser)]
#[command(
    name = "smcmc",
    version,
    about = "Sequential MCMC experiments and bound verification"
)]
struct Cli {
    /// Worker threads for chain-parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run chains one after another on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML config, or repeat the run recorded in a manifest.json.
    Run {
        config: PathBuf,
        /// Write into this directory instead of the configured one.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write per-step wall-clock times to timing.csv.
        #[arg(long)]
        timing: bool,
    },
    /// Check the convergence bounds on random finite-state chains.
    Verify {
        /// A check name, `bounds` for the bound checks, or `all`.
        #[arg(long, default_value = "bounds")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Write the table here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge table.csv files (or run directories) into one comparison table.
    Summarize {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<bool> {
    let policy = if cli.sequential {
        ExecPolicy::Sequential
    } else {
        ExecPolicy::Parallel
    };
    match cli.command {
        Command::Run {
            config,
            output,
            timing,
        } => {
            let mut cfg = if config.extension().is_some_and(|e| e == "json") {
                Manifest::load(&config)?
            } else {
                load_config(&config)?
            };
            cfg.output = output_dir(&cfg, output.as_deref());
            let outcome = execute(&cfg, &RunOptions { policy, timing })?;
            for f in &outcome.files {
                log::info!("wrote {}", f.display());
            }
            println!("{}", outcome.outdir.display());
            if cfg.algorithm == smcmc_tool::config::Algorithm::Verify {
                print!("{}", std::fs::read_to_string(outcome.outdir.join("table.csv"))?);
            }
            Ok(outcome.passed)
        }
        Command::Verify {
            suite,
            instances,
            seed,
            out,
        } => {
            if instances == 0 {
                bail!("--instances must be at least 1");
            }
            let (table, passed) = verify(&suite, instances, seed, policy)?;
            print!("{}", table.to_csv_string()?);
            if let Some(path) = out {
                table.write(&path)?;
            }
            Ok(passed)
        }
        Command::Summarize { inputs, out } => {
            let table = summarize(&inputs)?;
            print!("{}", table.to_csv_string()?);
            if let Some(path) = out {
                table.write(&path)?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = match threads {
        Some(n) => with_threads(n, || dispatch(cli)),
        None => dispatch(cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
