use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fishtax::cli_io::{parse_config, run_command, write_bundle, CliError, Command};

/// Optimal harvesting and proportional taxation of a shared fish stock.
#[derive(Debug, Parser)]
#[command(name = "fishtax", version)]
struct Args {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV tables and summary.json.
    #[arg(long, default_value = "fishtax-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "solve")]
    command: Command,
    /// Accepted for compatibility; every pipeline is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = parse_config(&args.config)?;
    let bundle = run_command(args.command, &cfg)?;
    if args.command == Command::Validate {
        if !args.quiet {
            println!("{}: ok", args.config.display());
        }
        return Ok(());
    }
    let written = write_bundle(&bundle, &args.out)?;
    if !args.quiet {
        for (k, v) in &bundle.summary {
            println!("{k} = {v}");
        }
        for p in written {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
