//! `condflow`: scale functions, h-transforms, simulation and verification
//! scenarios from the command line.
//!
//! Reports go to stdout as JSON; `--out` receives the CSV artifact (or the
//! JSON report for `verify`). Exit codes: 0 success, 1 a verification check
//! failed, 2 bad input, 3 numeric failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use condflow_core::simulate::with_thread_pool;
use serde_json::Value;

use crate::commands::Ctx;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "condflow", version, about = "Conditioned diffusions via h-transforms")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample size; overrides the config file.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Output file for the CSV artifact or the verify report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CONDFLOW_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scale function on a grid and the boundary classification.
    Scale,
    /// Drift of the h-transformed diffusion.
    Transform,
    /// Simulate paths; `--out` writes them as `path,t,x`.
    Simulate,
    /// Probability of reaching `up` before `down`.
    Hitting,
    /// Rejection and weighted conditioning of a path functional.
    Condition,
    /// Run a verification scenario (or `all`).
    Verify {
        /// bm-bessel, bessel-bm, gbm, stopped-bm, counterexample, jumpwalk, roundtrip or all
        scenario: String,
    },
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        config: &config,
        seed: cli.seed.or(config.seed).unwrap_or(commands::DEFAULT_SEED),
        n: cli.n,
        out: cli.out.as_deref(),
    };
    let report: Value = match &cli.command {
        Command::Scale => commands::scale(&ctx)?,
        Command::Transform => commands::transform_cmd(&ctx)?,
        Command::Simulate => commands::simulate(&ctx)?,
        Command::Hitting => commands::hitting(&ctx)?,
        Command::Condition => commands::condition(&ctx)?,
        Command::Verify { scenario } => {
            let (reports, pass) = commands::verify(&ctx, scenario)?;
            for r in &reports {
                for c in &r.checks {
                    let verdict = if c.pass { "PASS" } else { "FAIL" };
                    eprintln!("{verdict} {}/{}: {} vs {} ({})", r.scenario, c.name, c.value, c.target, c.rule);
                }
            }
            let text = if let [one] = reports.as_slice() {
                serde_json::to_string_pretty(one)
            } else {
                serde_json::to_string_pretty(&serde_json::json!({ "schema": 1, "pass": pass, "reports": reports }))
            }
            .expect("report serializes");
            if let Some(path) = &ctx.out {
                std::fs::write(path, format!("{text}\n"))
                    .map_err(|source| CliError::Output { path: path.display().to_string(), source })?;
            }
            println!("{text}");
            return Ok(if pass { 0 } else { 1 });
        }
    };
    print_json(&report);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = with_thread_pool(cli.threads, || run(&cli));
    let code = match result {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code)
}
