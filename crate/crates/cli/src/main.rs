mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::{Outcome, Sink};
use config::Job;

/// Pseudoholomorphic surfaces in S^2n from holomorphic data.
///
/// Exit codes: 0 PASS, 1 error, 2 verification FAIL or refusal.
#[derive(Parser)]
#[command(name = "wsphere", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Print a sample config for n = 1, 2 or 3 and exit.
    #[arg(long, value_name = "N")]
    seed_demo: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Common {
    /// JSON job config.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Only report failures and errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the surface on the grid, write meshes and diagnostics.
    Generate(Common),
    /// Check every invariant family on the configured source.
    Verify(Common),
    /// Recover the holomorphic data of a surface and rebuild it.
    Reconstruct(Common),
    /// Sample the Kaehler hypersurface over the normal bundle.
    Kaehler(Common),
    /// Sample the ruled minimal submanifold and probe its mean curvature.
    Ruled(Common),
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.seed_demo {
        println!("{}", serde_json::to_string_pretty(&config::demo(n)?)?);
        return Ok(Outcome::Pass);
    }
    let Some(command) = cli.command else {
        anyhow::bail!("no subcommand given; see --help");
    };
    let (common, run): (&Common, fn(&Job, &Sink) -> Result<Outcome>) = match &command {
        Command::Generate(c) => (c, commands::generate),
        Command::Verify(c) => (c, commands::verify),
        Command::Reconstruct(c) => (c, commands::reconstruct),
        Command::Kaehler(c) => (c, commands::kaehler),
        Command::Ruled(c) => (c, commands::ruled),
    };
    let job = Job::new(config::load(&common.config)?)?;
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let sink = Sink {
        dir: &common.out,
        quiet: common.quiet,
    };
    let outcome = run(&job, &sink)?;
    sink.say(outcome.label());
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail | Outcome::Refused) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
