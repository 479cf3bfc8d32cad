use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use widesense::harness::{run, write_output, Experiment, ExperimentSpec};
use widesense::Error;

/// Run a spectrum-sensing experiment and write its result table as CSV.
#[derive(Debug, Parser)]
#[command(name = "widesense", version)]
struct Cli {
    experiment: Experiment,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials` from the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV; stdout when neither this nor the config names one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite an output produced by a different configuration.
    #[arg(long)]
    force: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Numerical(_) | Error::DegeneratePartition(_) => 3,
        Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 2,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let mut spec = ExperimentSpec::from_file(&cli.config)?;
    if let Some(seed) = cli.seed {
        spec.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        spec.trials = trials;
    }
    if let Some(out) = cli.out {
        spec.output = Some(out);
    }
    let table = run(&spec, cli.experiment)?;
    match &spec.output {
        Some(path) => {
            write_output(&table, path, cli.force)?;
            log::info!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => std::io::stdout().write_all(table.to_csv()?.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("widesense: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
