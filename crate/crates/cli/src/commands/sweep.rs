use std::path::PathBuf;

use clap::Args;
use relocsim::report::{sweep_tables, BUSY_FILE, RUNS_FILE, TRAINS_FILE};
use relocsim::sweep::sweep;

use crate::error::{write_file, CliError, Result};
use crate::scenario::{resolve_config, ScenarioArgs};

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// TOML config: `[simulation]` is the base run, `[sweep]` the grid.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for runs.csv, busy.csv and train_lengths.csv.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SweepArgs) -> Result<()> {
    let scenario = args.scenario.load()?;
    let cfg = resolve_config(args.config.as_ref(), &scenario)?;
    let grid = cfg.sweep.unwrap_or_default();
    if grid.cells().is_empty() {
        return Err(CliError::config("the sweep grid is empty"));
    }
    let mut base = cfg.simulation;
    base.check_invariants = false;

    let result = sweep(&scenario.trace, &base, &grid);
    for (cell, why) in &result.skipped {
        eprintln!(
            "skipped {} T={} v_T={} relocators={}: {why}",
            cell.strategy.name(),
            cell.interval,
            cell.train_size,
            cell.relocators
        );
    }
    if result.rows.is_empty() {
        return Err(CliError::config("every cell of the sweep grid is invalid"));
    }
    let (runs, busy, trains) = sweep_tables(&result).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&args.out.join(RUNS_FILE), runs)?;
    write_file(&args.out.join(BUSY_FILE), busy)?;
    write_file(&args.out.join(TRAINS_FILE), trains)?;
    eprintln!("{} runs written to {}", result.rows.len(), args.out.display());
    Ok(())
}
