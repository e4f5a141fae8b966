use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tvcap::scenario::{self, ScenarioError};

#[derive(Parser)]
#[command(name = "tvcap", version, about = "Run time-varying capacitor emulation scenarios")]
struct Cli {
    /// Print only errors.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name) and write its artifacts.
    Run {
        #[command(flatten)]
        target: Target,
        /// Artifacts go to DIR/<scenario name>/.
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// List the bundled scenarios.
    List,
    /// Parse and validate a scenario without running it.
    Validate {
        #[command(flatten)]
        target: Target,
    },
}

#[derive(Args)]
struct Target {
    /// Path to a scenario JSON file, or the name of a bundled scenario.
    scenario: String,
    /// Set a parameter, by dotted path or unique key (repeatable).
    #[arg(long = "override", value_name = "K=V")]
    overrides: Vec<String>,
}

impl Target {
    fn load(&self) -> Result<scenario::Loaded, ScenarioError> {
        let overrides = self.overrides.iter().map(|o| scenario::parse_override(o)).collect::<Result<Vec<_>, _>>()?;
        scenario::load_path(&self.scenario, &overrides)
    }
}

fn list(quiet: bool) -> anyhow::Result<()> {
    for (name, text) in scenario::BUNDLED {
        let l = scenario::load(text, name, &[]).with_context(|| format!("bundled scenario {name}"))?;
        if !quiet {
            println!("{name:<24} {:<10} {}", l.scenario.kind.as_str(), l.scenario.description);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => return match list(cli.quiet) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(3)
            }
        },
        Command::Validate { target } => target.load().map(|l| {
            if !cli.quiet {
                println!("{}: ok ({}, {} checks)", l.origin, l.scenario.kind.as_str(), l.scenario.checks.len());
            }
            true
        }),
        Command::Run { target, out } => target.load().and_then(|l| {
            let report = scenario::run_scenario(&l)?;
            let dir = out.join(&report.scenario.name);
            report.write_to(&dir)?;
            if !cli.quiet {
                print!("{}", report.to_text());
                println!("artifacts: {}", dir.display());
            }
            Ok(report.all_passed())
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
