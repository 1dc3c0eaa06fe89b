use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sdm_rmcsa::experiment::{run_experiment, run_single, Cell, ExperimentConfig};

/// Run an RMCSA policy sweep described by a TOML file.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Experiment configuration file.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory (overrides the config file).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(short, long)]
    workers: Option<usize>,
    /// Run one cell, POLICY:LOAD:REP, and print its record as JSON.
    #[arg(long)]
    cell: Option<Cell>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(out) = args.output {
        cfg.output = out;
    }
    if let Some(cell) = args.cell {
        let record = run_single(&cfg, cell)?;
        println!("{}", serde_json::to_string_pretty(&record)?);
        return Ok(());
    }
    let results = run_experiment(&cfg, args.workers)?;
    println!(
        "{} rows, {} runs written to {}",
        results.summary.len(),
        results.runs.len(),
        cfg.output.display()
    );
    Ok(())
}
