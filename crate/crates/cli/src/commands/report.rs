use std::path::PathBuf;

use clap::Args;
use relocsim::domain::station_daily_unbalance;
use relocsim::fleet::{estimate_rates, solve_fluid};
use relocsim::report::{build_figures, fluid_figure, unbalance_figure, BUSY_FILE, RUNS_FILE, TRAINS_FILE};

use super::write_figures;
use crate::error::{create_dir, read_text, CliError, Result};
use crate::scenario::ScenarioArgs;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `sweep`.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Scenario for the station-unbalance and fluid-flow charts.
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output directory for chart CSV and JSON files.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: ReportArgs) -> Result<()> {
    if args.sweep.is_none() && !args.scenario.is_given() {
        return Err(CliError::config("give --sweep, a scenario, or both"));
    }
    create_dir(&args.out)?;
    let mut files = Vec::new();
    if let Some(dir) = &args.sweep {
        let runs = read_text(&dir.join(RUNS_FILE))?;
        let busy = read_text(&dir.join(BUSY_FILE))?;
        let trains = read_text(&dir.join(TRAINS_FILE))?;
        files.extend(build_figures(&runs, &busy, &trains).map_err(|e| CliError::input(dir, e))?);
    }
    if args.scenario.is_given() {
        let trace = args.scenario.load()?.trace;
        files.extend(unbalance_figure(&station_daily_unbalance(&trace)).map_err(|e| CliError::Input(e.to_string()))?);
        let rates = estimate_rates(&trace).map_err(CliError::config)?;
        let sol = solve_fluid(&rates, &trace.travel_times).map_err(|e| CliError::Input(e.to_string()))?;
        files.extend(fluid_figure(&sol).map_err(|e| CliError::Input(e.to_string()))?);
    }
    write_figures(&args.out, &files)?;
    eprintln!("{} chart files written to {}", files.len(), args.out.display());
    Ok(())
}
