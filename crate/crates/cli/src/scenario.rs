//! Locating and loading the demand scenario named on the command line.

use std::path::PathBuf;

use clap::Args;
use relocsim::bundle::load_bundle;
use relocsim::demand::{derive_travel_times, DEFAULT_SPEED_MPS};
use relocsim::domain::{validate_scenario, DemandTrace};
use relocsim::io;

use crate::config::ConfigFile;
use crate::error::{read_file, CliError, Result};

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario bundle directory (stations, demand, manifest).
    #[arg(long, conflicts_with_all = ["demand", "stations"])]
    pub bundle: Option<PathBuf>,
    /// Demand CSV: trip_id,origin,destination,request_time_s[,travel_time_s].
    #[arg(long, requires = "stations")]
    pub demand: Option<PathBuf>,
    /// Stations CSV: station_id,x_m,y_m.
    #[arg(long, requires = "demand")]
    pub stations: Option<PathBuf>,
    /// Travel-time matrix CSV (seconds, no header). Derived from distances when absent.
    #[arg(long)]
    pub travel_times: Option<PathBuf>,
    /// Speed in m/s used when travel times are derived.
    #[arg(long)]
    pub derive_speed: Option<f64>,
    /// Scenario length in seconds; defaults to whole days covering the demand.
    #[arg(long)]
    pub horizon: Option<u64>,
}

pub struct Scenario {
    pub trace: DemandTrace,
    /// Config shipped inside a bundle, if any.
    pub bundled_config: Option<String>,
}

impl ScenarioArgs {
    pub fn is_given(&self) -> bool {
        self.bundle.is_some() || self.demand.is_some()
    }

    pub fn load(&self) -> Result<Scenario> {
        if let Some(speed) = self.derive_speed {
            if !(speed.is_finite() && speed > 0.0) {
                return Err(CliError::config(format!("--derive-speed must be positive, got {speed}")));
            }
        }
        let scenario = if let Some(dir) = &self.bundle {
            let b = load_bundle(dir, self.derive_speed)?;
            let mut trace = b.trace;
            if let Some(h) = self.horizon {
                trace.horizon = h;
            }
            Scenario { trace, bundled_config: b.config }
        } else {
            let (Some(demand), Some(stations)) = (&self.demand, &self.stations) else {
                return Err(CliError::config("give either --bundle or both --demand and --stations"));
            };
            let st_bytes = read_file(stations)?;
            let st = io::read_stations(st_bytes.as_slice())?;
            let times = match &self.travel_times {
                Some(p) => io::read_travel_times(read_file(p)?.as_slice())?,
                None => derive_travel_times(&st, self.derive_speed.unwrap_or(DEFAULT_SPEED_MPS))
                    .map_err(CliError::config)?,
            };
            let trace = io::read_trace(st_bytes.as_slice(), read_file(demand)?.as_slice(), times, self.horizon)?;
            Scenario { trace, bundled_config: None }
        };

        let report = validate_scenario(&scenario.trace);
        if !report.is_valid() {
            let list: Vec<String> = report.violations.iter().take(5).map(|v| format!("{v:?}")).collect();
            return Err(CliError::Input(format!(
                "scenario fails validation ({} problems): {}",
                report.violations.len(),
                list.join("; ")
            )));
        }
        Ok(scenario)
    }
}

/// Explicit config file first, then the bundle's own config, then defaults.
pub fn resolve_config(explicit: Option<&PathBuf>, scenario: &Scenario) -> Result<ConfigFile> {
    match (explicit, &scenario.bundled_config) {
        (Some(p), _) => ConfigFile::load(p),
        (None, Some(text)) => ConfigFile::parse(text),
        (None, None) => Ok(ConfigFile::default()),
    }
}
