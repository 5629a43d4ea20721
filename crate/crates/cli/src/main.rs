use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pt_cavity_cli::{derive_params, load_config, run_experiment, CliError};

#[derive(Debug, Parser)]
#[command(name = "ptcavity", version, about = "PT-symmetric cavity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured scenario and write its outputs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Evaluate the scenario's acceptance checks; exit with status 4 if any fails.
        #[arg(long)]
        check: bool,
        /// Round trips at which to save the field, e.g. `20,40`; overrides the config.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<u64>>,
    },
    /// Print the derived oscillator parameters as JSON.
    Params {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, check, snapshots } => {
            let mut spec = load_config(&config)?;
            if let Some(s) = snapshots {
                spec.snapshots = s;
            }
            let outcome = run_experiment(&spec, &out)?;
            for path in &outcome.files {
                println!("wrote {}", path.display());
            }
            if check {
                for c in &outcome.summary.checks {
                    println!("{}", c.line());
                }
                let failed = outcome.failed_checks();
                if failed > 0 {
                    return Err(CliError::CheckFailed { failed });
                }
            }
            Ok(())
        }
        Command::Params { config } => {
            let spec = load_config(&config)?;
            let derived = derive_params(&spec)?;
            println!("{}", serde_json::to_string_pretty(&derived).expect("derived parameters serialize"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
