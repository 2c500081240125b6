use std::path::PathBuf;

use clap::Args;
use relocsim::fleet::{estimate_rates, min_fleet_no_relocation, solve_fluid};
use serde::Serialize;

use super::pretty_json;
use crate::error::{write_file, CliError, Result};
use crate::scenario::ScenarioArgs;

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output directory for bounds.json, alpha.csv and flows.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Bounds {
    per_station_v0: Vec<u64>,
    total_no_reloc: u64,
    /// Trip id at which each station's requirement peaks.
    witness_trip: Vec<Option<u64>>,
    alpha_matrix_csv_path: String,
    flows_csv_path: String,
    min_fleet_fluid: f64,
    min_fleet_fluid_ceil: u64,
    rebalancing_vehicle_hours_per_hour: f64,
}

fn csv_of(rows: impl IntoIterator<Item = Vec<String>>, header: Option<&[&str]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).expect("in-memory write");
    }
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn run(args: BoundsArgs) -> Result<()> {
    let trace = args.scenario.load()?.trace;
    let sizing = min_fleet_no_relocation(&trace);
    let rates = estimate_rates(&trace).map_err(CliError::config)?;
    let sol = solve_fluid(&rates, &trace.travel_times).map_err(|e| CliError::Input(e.to_string()))?;
    let n = sol.n;

    let alpha = csv_of((0..n).map(|i| (0..n).map(|j| sol.flow(i, j).to_string()).collect()), None);
    let flows = csv_of(
        (0..n).map(|i| vec![i.to_string(), sol.inbound[i].to_string(), sol.outbound[i].to_string()]),
        Some(&["station", "inbound_veh_per_h", "outbound_veh_per_h"]),
    );
    write_file(&args.out.join("alpha.csv"), alpha)?;
    write_file(&args.out.join("flows.csv"), flows)?;

    let bounds = Bounds {
        per_station_v0: sizing.initial.clone(),
        total_no_reloc: sizing.total,
        witness_trip: sizing.witness.iter().map(|w| w.map(|k| trace.trips[k].id)).collect(),
        alpha_matrix_csv_path: "alpha.csv".into(),
        flows_csv_path: "flows.csv".into(),
        min_fleet_fluid: sol.min_fleet,
        min_fleet_fluid_ceil: sol.min_fleet_ceil(),
        rebalancing_vehicle_hours_per_hour: sol.objective,
    };
    let json = pretty_json(&bounds);
    write_file(&args.out.join("bounds.json"), &json)?;
    super::print_stdout(&json);
    Ok(())
}
