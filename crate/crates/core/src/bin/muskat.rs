use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use muskat::cli::{parse_config, simulate_command, turning_command, CommandOutcome, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "muskat", about = "Muskat interfaces over a permeability jump")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured datum and write the series CSV and a gnuplot script.
    Simulate { config: PathBuf },
    /// Evaluate the turning functional and write the report block.
    Turning { config: PathBuf },
    /// Print the config with every default filled in.
    Show { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<muskat::cli::RunConfig, CommandOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| CommandOutcome {
        exit_code: EXIT_CONFIG,
        files: Vec::new(),
        summary: format!("error: cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text).map_err(|e| CommandOutcome { exit_code: EXIT_CONFIG, files: Vec::new(), summary: format!("error: {e}") })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = match &args.command {
        Command::Simulate { config } => load(config).map(|c| simulate_command(&c)),
        Command::Turning { config } => load(config).map(|c| turning_command(&c)),
        Command::Show { config } => load(config).map(|c| CommandOutcome { exit_code: 0, files: Vec::new(), summary: c.to_text() }),
    }
    .unwrap_or_else(|o| o);
    if outcome.exit_code == 0 {
        print!("{}", outcome.summary);
    } else {
        eprint!("{}", outcome.summary);
        if !outcome.summary.ends_with('\n') {
            eprintln!();
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
