//! One relocation round on a hand-written snapshot.
//!
//! ```json
//! {
//!   "travel_times": [[0, 300], [300, 0]],
//!   "stations": [{"parked": 3, "drop": 0, "pick": 0}, {"parked": 0, "drop": 0, "pick": 2}],
//!   "strategy": "stackable",
//!   "train_size": 8,
//!   "capacity_mode": "train-car",
//!   "control": "zero",
//!   "relocators": [{"id": 0, "station": 0}],
//!   "now": 0,
//!   "approach_factor": 1.0
//! }
//! ```
//!
//! `stations` may be replaced by a plain `balances` list.

use std::path::PathBuf;

use clap::Args;
use relocsim::domain::TravelTimeMatrix;
use relocsim::rebalance::{
    autonomous_dispatch, classify_balances, match_feeders_recipients, match_relocators, BalanceEntry, CapacityMode,
    ControlPolicy, IdleRelocator,
};
use relocsim::Strategy;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{emit, pretty_json};
use crate::error::{read_text, CliError, Result};

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Snapshot JSON file.
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Write the plan here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct StationState {
    parked: u32,
    #[serde(default)]
    drop: u32,
    #[serde(default)]
    pick: u32,
}

fn default_train_size() -> u32 {
    8
}

fn default_factor() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Snapshot {
    travel_times: Vec<Vec<u64>>,
    #[serde(default)]
    stations: Option<Vec<StationState>>,
    #[serde(default)]
    balances: Option<Vec<i64>>,
    #[serde(default = "stackable")]
    strategy: Strategy,
    #[serde(default = "default_train_size")]
    train_size: u32,
    #[serde(default)]
    capacity_mode: CapacityMode,
    #[serde(default)]
    control: ControlPolicy,
    #[serde(default)]
    relocators: Vec<IdleRelocator>,
    #[serde(default)]
    now: u64,
    #[serde(default = "default_factor")]
    approach_factor: f64,
}

fn stackable() -> Strategy {
    Strategy::Stackable
}

pub fn run(args: PlanArgs) -> Result<()> {
    let text = read_text(&args.snapshot)?;
    let snap: Snapshot = serde_json::from_str(&text).map_err(|e| CliError::input(&args.snapshot, e))?;
    let times = TravelTimeMatrix::from_rows(snap.travel_times.clone()).map_err(|e| CliError::input(&args.snapshot, e))?;
    let n = times.len();

    let (entries, balances): (Option<Vec<BalanceEntry>>, Vec<i64>) = match (&snap.stations, &snap.balances) {
        (Some(st), None) => {
            let e: Vec<BalanceEntry> =
                st.iter().map(|s| BalanceEntry::with_policy(s.parked, s.drop, s.pick, snap.control)).collect();
            let b = e.iter().map(|x| x.balance).collect();
            (Some(e), b)
        }
        (None, Some(b)) => (None, b.clone()),
        _ => return Err(CliError::input(&args.snapshot, "give exactly one of `stations` and `balances`")),
    };
    if balances.len() != n {
        return Err(CliError::input(
            &args.snapshot,
            format!("{} stations but a {n}x{n} travel-time matrix", balances.len()),
        ));
    }
    if let Some(r) = snap.relocators.iter().find(|r| r.station.index() >= n) {
        return Err(CliError::input(&args.snapshot, format!("relocator {} at unknown station {}", r.id, r.station)));
    }
    if !(snap.approach_factor.is_finite() && snap.approach_factor > 0.0) {
        return Err(CliError::config("approach_factor must be positive"));
    }

    let cap = match snap.strategy {
        Strategy::Standard => Some(1),
        Strategy::Stackable => Some(snap.capacity_mode.effective(snap.train_size)),
        Strategy::None | Strategy::Autonomous => None,
    };
    let classes = classify_balances(&balances);
    let (pairs, diagnostics) = match snap.strategy {
        Strategy::None => (Vec::new(), classes.diagnostics),
        _ => match_feeders_recipients(&classes.feeders, &classes.recipients, cap, &times),
    };
    let mut out = json!({
        "strategy": snap.strategy,
        "pair_cap": cap,
        "balances": balances,
        "feeders": classes.feeders,
        "recipients": classes.recipients,
        "diagnostics": diagnostics,
        "pairs": pairs,
    });
    if let Some(e) = entries {
        out["entries"] = json!(e);
    }
    match snap.strategy {
        Strategy::Standard | Strategy::Stackable => {
            let m = match_relocators(&pairs, &snap.relocators, &times, snap.now, snap.approach_factor);
            out["tasks"] = json!(m.tasks);
            out["backlog"] = json!(m.backlog);
        }
        Strategy::Autonomous => out["moves"] = json!(autonomous_dispatch(&pairs, &times, snap.now)),
        Strategy::None => {}
    }
    emit(args.out.as_deref(), &pretty_json(&out))
}
