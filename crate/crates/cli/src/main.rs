//! `relocsim`: generate scenarios, compute fleet bounds, plan a relocation
//! round, simulate, sweep and report.

use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod help_json;
mod scenario;

#[derive(Debug, Parser)]
#[command(name = "relocsim", version, about = "Car-sharing relocation experiments")]
struct Cli {
    /// Print a machine-readable description of every subcommand and flag.
    #[arg(long, exclusive = true)]
    help_json: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic scenario bundle.
    Gen(commands::gen::GenArgs),
    /// Fleet size without relocation and the fluid-model lower bound.
    Bounds(commands::bounds::BoundsArgs),
    /// Run one matching round on a JSON snapshot and print the plan.
    Plan(commands::plan::PlanArgs),
    /// Simulate one configuration and write its metrics.
    Sim(commands::sim::SimArgs),
    /// Simulate every cell of a parameter grid.
    Sweep(commands::sweep::SweepArgs),
    /// Turn sweep tables (and optionally a scenario) into chart data.
    Report(commands::report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.help_json {
        commands::print_stdout(&format!("{}\n", help_json::describe(&Cli::command())));
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        let _ = Cli::command().print_help();
        return ExitCode::from(2);
    };
    let result = match command {
        Command::Gen(a) => commands::gen::run(a),
        Command::Bounds(a) => commands::bounds::run(a),
        Command::Plan(a) => commands::plan::run(a),
        Command::Sim(a) => commands::sim::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Report(a) => commands::report::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relocsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
