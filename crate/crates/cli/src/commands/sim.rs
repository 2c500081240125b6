use std::path::PathBuf;

use clap::Args;
use relocsim::sim::{simulate, SimError};
use serde_json::json;

use super::{emit, pretty_json};
use crate::error::{write_file, CliError, Result};
use crate::scenario::{resolve_config, ScenarioArgs};

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// TOML config; the `[simulation]` table is used. Falls back to the bundle's config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Metrics JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-event CSV log path.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Check conservation invariants after every event.
    #[arg(long)]
    pub check_invariants: bool,
}

pub fn run(args: SimArgs) -> Result<()> {
    let scenario = args.scenario.load()?;
    let mut cfg = resolve_config(args.config.as_ref(), &scenario)?.simulation;
    cfg.record_events = args.events.is_some();
    cfg.check_invariants |= args.check_invariants;

    let out = simulate(&scenario.trace, &cfg).map_err(|e| match e {
        SimError::Config(c) => CliError::config(c),
        SimError::Invariant { .. } => CliError::Input(e.to_string()),
    })?;

    if let Some(path) = &args.events {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time_s", "event", "station", "value"]).expect("in-memory write");
        for e in &out.events {
            w.write_record([
                e.time.to_string(),
                e.kind.name().to_string(),
                e.station.map(|s| s.to_string()).unwrap_or_default(),
                e.value.to_string(),
            ])
            .expect("in-memory write");
        }
        write_file(path, w.into_inner().expect("in-memory flush"))?;
    }

    let m = &out.metrics;
    let doc = json!({
        "strategy": cfg.strategy,
        "fleet_size": cfg.fleet_size,
        "T_s": cfg.interval,
        "v_T": cfg.train_size,
        "relocators": cfg.relocators,
        "relocator_units": m.relocator_units,
        "workers_per_unit": m.workers_per_unit,
        "total_requests": m.total_requests,
        "accepted": m.accepted,
        "rejected": m.rejected,
        "acceptance": m.acceptance,
        "relocated_vehicles": m.relocated_vehicles,
        "relocation_tasks": m.relocation_tasks,
        "aborted_tasks": m.aborted_tasks,
        "shortfall_vehicles": m.shortfall_vehicles,
        "relocator_busy_s": m.relocator_busy_time,
        "mean_train_length": m.mean_train_length(),
        "train_lengths": m.train_lengths,
        "rejections_per_station": m.rejections_per_station,
        "busy_relocators_per_minute": m.busy_series(),
        "end_time_s": m.end_time,
    });
    emit(args.out.as_deref(), &pretty_json(&doc))
}
