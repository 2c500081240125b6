//! The shipped reference scenario: a seeded commuter day on a 5 x 4 grid of
//! suburban stations 3 km apart.

use crate::demand::{commuter_profile, derive_travel_times, grid_stations, synthesize_demand, DAY};
use crate::domain::DemandTrace;
use crate::fleet::{estimate_rates, solve_fluid};
use crate::rebalance::ControlPolicy;
use crate::sim::{SimulationConfig, Strategy};

pub const SEED: u64 = 20_170_926;
pub const COLS: usize = 5;
pub const ROWS: usize = 4;
pub const SPACING_M: f64 = 3000.0;
pub const SPEED_MPS: f64 = 8.33;
pub const DAILY_TRIPS: f64 = 2000.0;
pub const TRAIN_SIZE: u32 = 8;

/// 20 stations, 24 hours of commuter demand.
pub fn reference_trace() -> DemandTrace {
    let stations = grid_stations(COLS, ROWS, SPACING_M);
    let times = derive_travel_times(&stations, SPEED_MPS).expect("positive speed");
    let profile = commuter_profile(&stations, DAILY_TRIPS, DAY);
    synthesize_demand(&profile, &stations, &times, SEED).expect("valid reference profile")
}

/// Fleet of `ceil(1.2 x fluid minimum fleet)` for `trace`.
pub fn reference_fleet(trace: &DemandTrace) -> u32 {
    let rates = estimate_rates(trace).expect("positive horizon");
    let sol = solve_fluid(&rates, &trace.travel_times).expect("balanced rates");
    (1.2 * sol.min_fleet - 1e-9).ceil() as u32
}

/// Reference run settings for `strategy` with `relocators` relocators and
/// the given rebalancing interval.
pub fn reference_config(trace: &DemandTrace, strategy: Strategy, relocators: u32, interval: u64) -> SimulationConfig {
    SimulationConfig {
        fleet_size: reference_fleet(trace),
        strategy,
        relocators,
        interval,
        train_size: TRAIN_SIZE,
        control: ControlPolicy::ConservativeOne,
        ..SimulationConfig::default()
    }
}
