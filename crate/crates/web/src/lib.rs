//! WebAssembly bindings for the browser demo.
//!
//! Every export takes a JSON string and returns a JSON string. Omitted
//! fields fall back to the reference scenario.

use relocsim::demand::{commuter_profile, derive_travel_times, grid_stations, synthesize_demand, DAY};
use relocsim::fleet::{estimate_rates, min_fleet_no_relocation, solve_fluid};
use relocsim::reference::{self, reference_config, reference_fleet};
use relocsim::sim::{simulate as run_sim, Strategy};
use relocsim::domain::station_daily_unbalance;
use relocsim::DemandTrace;
use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_STATIONS: usize = 100;
const MAX_TRIPS: f64 = 20_000.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioInput {
    pub cols: usize,
    pub rows: usize,
    pub spacing_m: f64,
    pub daily_trips: f64,
    pub seed: u64,
}

impl Default for ScenarioInput {
    fn default() -> Self {
        ScenarioInput {
            cols: reference::COLS,
            rows: reference::ROWS,
            spacing_m: reference::SPACING_M,
            daily_trips: reference::DAILY_TRIPS,
            seed: reference::SEED,
        }
    }
}

impl ScenarioInput {
    fn trace(&self) -> Result<DemandTrace, String> {
        let n = self.cols * self.rows;
        if !(2..=MAX_STATIONS).contains(&n) {
            return Err(format!("grid must hold 2 to {MAX_STATIONS} stations, got {n}"));
        }
        if !(self.spacing_m > 0.0 && self.spacing_m.is_finite()) {
            return Err("spacing must be positive".into());
        }
        if !(self.daily_trips > 0.0 && self.daily_trips <= MAX_TRIPS) {
            return Err(format!("daily trips must be in (0, {MAX_TRIPS}]"));
        }
        let stations = grid_stations(self.cols, self.rows, self.spacing_m);
        let times = derive_travel_times(&stations, reference::SPEED_MPS).map_err(|e| e.to_string())?;
        synthesize_demand(&commuter_profile(&stations, self.daily_trips, DAY), &stations, &times, self.seed)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimInput {
    pub scenario: ScenarioInput,
    pub strategy: Strategy,
    pub relocators: u32,
    pub interval_s: u64,
    pub train_size: u32,
    /// Defaults to 1.2 x the fluid fleet.
    pub fleet: Option<u32>,
}

impl Default for SimInput {
    fn default() -> Self {
        SimInput {
            scenario: ScenarioInput::default(),
            strategy: Strategy::Stackable,
            relocators: 15,
            interval_s: 900,
            train_size: reference::TRAIN_SIZE,
            fleet: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveInput {
    pub scenario: ScenarioInput,
    pub interval_s: u64,
    pub relocators: Vec<u32>,
    pub fleet: Option<u32>,
}

impl Default for CurveInput {
    fn default() -> Self {
        CurveInput { scenario: ScenarioInput::default(), interval_s: 900, relocators: vec![5, 10, 15, 20, 25, 30], fleet: None }
    }
}

#[derive(Debug, Serialize)]
struct Curve {
    strategy: Strategy,
    acceptance: Vec<f64>,
}

fn parse<T: for<'de> Deserialize<'de> + Default>(input: &str) -> Result<T, String> {
    if input.trim().is_empty() {
        return Ok(T::default());
    }
    serde_json::from_str(input).map_err(|e| format!("bad input: {e}"))
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Station layout, demand imbalance and both fleet bounds.
#[wasm_bindgen]
pub fn scenario(input: &str) -> Result<String, String> {
    let sc: ScenarioInput = parse(input)?;
    let trace = sc.trace()?;
    let sizing = min_fleet_no_relocation(&trace);
    let rates = estimate_rates(&trace).map_err(|e| e.to_string())?;
    let sol = solve_fluid(&rates, &trace.travel_times).map_err(|e| e.to_string())?;
    let n = trace.stations.len();
    let flows: Vec<_> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| sol.flow(i, j) > 1e-9)
        .map(|(i, j)| json!({"from": i, "to": j, "per_hour": sol.flow(i, j)}))
        .collect();
    to_json(&json!({
        "stations": trace.stations.iter().map(|s| [s.x, s.y]).collect::<Vec<_>>(),
        "trips": trace.trips.len(),
        "unbalance": station_daily_unbalance(&trace),
        "no_relocation_per_station": sizing.initial,
        "no_relocation_fleet": sizing.total,
        "fluid_fleet": sol.min_fleet,
        "suggested_fleet": reference_fleet(&trace),
        "flows": flows,
    }))
}

/// One simulated day.
#[wasm_bindgen]
pub fn simulate(input: &str) -> Result<String, String> {
    let req: SimInput = parse(input)?;
    let trace = req.scenario.trace()?;
    let mut cfg = reference_config(&trace, req.strategy, req.relocators, req.interval_s);
    cfg.train_size = req.train_size;
    if let Some(f) = req.fleet {
        cfg.fleet_size = f;
    }
    let m = run_sim(&trace, &cfg).map_err(|e| e.to_string())?.metrics;
    to_json(&json!({
        "fleet": cfg.fleet_size,
        "accepted": m.accepted,
        "rejected": m.rejected,
        "acceptance": m.acceptance,
        "rejections_per_station": m.rejections_per_station,
        "busy_per_minute": m.busy_series(),
        "train_lengths": m.train_lengths,
        "mean_train_length": m.mean_train_length(),
        "relocated_vehicles": m.relocated_vehicles,
    }))
}

/// Acceptance rate per strategy across relocator counts.
#[wasm_bindgen]
pub fn acceptance_curve(input: &str) -> Result<String, String> {
    let req: CurveInput = parse(input)?;
    if req.relocators.is_empty() || req.relocators.len() > 20 {
        return Err("give 1 to 20 relocator counts".into());
    }
    let trace = req.scenario.trace()?;
    let mut curves = Vec::new();
    for strategy in Strategy::ALL {
        let acceptance = req
            .relocators
            .iter()
            .map(|&k| {
                let mut cfg = reference_config(&trace, strategy, k, req.interval_s);
                if let Some(f) = req.fleet {
                    cfg.fleet_size = f;
                }
                run_sim(&trace, &cfg).map(|o| o.metrics.acceptance).map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        curves.push(Curve { strategy, acceptance });
    }
    to_json(&json!({"relocators": req.relocators, "curves": curves}))
}
