//! The TOML run configuration.
//!
//! ```toml
//! [simulation]
//! fleet_size = 23
//! strategy = "stackable"
//! interval = 900
//! train_size = 8
//! relocators = 15
//! capacity_mode = "train-car"
//! control = "conservative-one"
//! reassign_on_idle = true
//! standard_mode = "bike"
//! bike_factor = 3.0
//! placement = { kind = "proportional-to-outflow" }
//!
//! [sweep]
//! strategies = ["none", "standard", "stackable", "autonomous"]
//! intervals = [300, 900, 1800]
//! train_sizes = [8]
//! relocators = [5, 15, 30]
//! ```
//!
//! Every key is optional; missing keys take their defaults.

use std::path::Path;

use relocsim::sweep::SweepGrid;
use relocsim::SimulationConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub simulation: SimulationConfig,
    pub sweep: Option<SweepGrid>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(CliError::config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use relocsim::rebalance::{CapacityMode, ControlPolicy};
    use relocsim::Strategy;

    #[test]
    fn documented_example_parses() {
        let doc: String = include_str!("config.rs")
            .lines()
            .skip_while(|l| *l != "//! ```toml")
            .skip(1)
            .take_while(|l| *l != "//! ```")
            .map(|l| format!("{}\n", l.trim_start_matches("//!").trim_start()))
            .collect();
        let cfg = ConfigFile::parse(&doc).unwrap();
        assert_eq!(cfg.simulation.fleet_size, 23);
        assert_eq!(cfg.simulation.strategy, Strategy::Stackable);
        assert_eq!(cfg.simulation.capacity_mode, CapacityMode::TrainCar);
        assert_eq!(cfg.simulation.control, ControlPolicy::ConservativeOne);
        let grid = cfg.sweep.unwrap();
        assert_eq!(grid.cells().len(), 4 * 3 * 3);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ConfigFile::default();
        cfg.simulation.relocators = 7;
        cfg.simulation.interval = 600;
        assert_eq!(ConfigFile::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = ConfigFile::parse("[simulation]\nfleet = 3\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(ConfigFile::parse("[simulaton]\n").unwrap_err().exit_code(), 2);
    }
}
