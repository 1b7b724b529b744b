use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bcreg::commands::{cmd_eigs, cmd_simulate, cmd_synth, reproduce};
use bcreg::config::RunConfig;
use bcreg::verify::{cmd_verify, Suite};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bcreg", version, about = "Output regulation of a boundary-controlled wave equation on an annulus")]
struct Cli {
    /// Run configuration (TOML); the annulus reference problem when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized verification fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the radial eigenvalues of the plant.
    Eigs,
    /// Synthesize the configured controller and report G-conditions and error bound.
    Synth,
    /// Run the closed loop and write the error series.
    Simulate,
    /// Run invariant suites; exits nonzero if any check fails.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Regenerate the data behind one of the reference figures.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
    },
    /// Print the default configuration.
    DefaultConfig,
}

fn run(cli: Cli) -> Result<bool> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output.directory = out.clone();
    }
    let out = config.output.directory.clone();
    match cli.command {
        Command::Eigs => {
            let rows = cmd_eigs(&config, &out)?;
            println!("wrote {rows} rows to {}", out.join("eigs.csv").display());
        }
        Command::Synth => {
            let report = cmd_synth(&config, &out)?;
            print!("{}", toml::to_string(&report)?);
        }
        Command::Simulate => {
            let run = cmd_simulate(&config, &out)?;
            print!("{}", toml::to_string(&run.summary)?);
        }
        Command::Verify { suite } => {
            let checks = cmd_verify(&config, suite, cli.seed)?;
            for check in &checks {
                println!("{check}");
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {failed} failed", checks.len());
            return Ok(failed == 0);
        }
        Command::Reproduce { figure } => {
            let report = reproduce(figure, &out)?;
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            for note in &report.notes {
                println!("{note}");
            }
        }
        Command::DefaultConfig => print!("{}", RunConfig::default().to_toml()?),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
