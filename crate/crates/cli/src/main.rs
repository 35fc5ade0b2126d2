use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdmiso_cli::scenario::parse_grid_override;
use pdmiso_cli::{commands, run_density, run_field, run_verify, CliError, Options, Scenario};

#[derive(Parser)]
#[command(name = "pdmiso", version, about = "Position-dependent-mass systems isospectral to the 2D oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override grid node counts, e.g. 301x301.
    #[arg(long, value_parser = parse_grid_override)]
    grid: Option<(usize, usize)>,
    /// Eigensolver seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Write the probability density as CSV and PGM.
    Density(RunArgs),
    /// Run the numerical checks and write a report.
    Verify(RunArgs),
    /// Write the magnetic field and mass profiles.
    Field(RunArgs),
    /// List the built-in coordinate maps.
    ListMaps,
}

fn load(args: &RunArgs) -> Result<(Scenario, Options), CliError> {
    let sc = Scenario::load(&args.config)?;
    let opts = Options {
        out: args.out.clone(),
        grid: args.grid,
        seed: args.seed,
    };
    Ok((sc, opts))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::ListMaps => {
            print!("{}", commands::list_maps());
            Ok(0)
        }
        Command::Density(args) => {
            let (sc, opts) = load(&args)?;
            for p in run_density(&sc, &opts)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Field(args) => {
            let (sc, opts) = load(&args)?;
            for p in run_field(&sc, &opts)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let (sc, opts) = load(&args)?;
            let report = run_verify(&sc, &opts)?;
            print!("{}", report.to_tsv());
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pdmiso: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
