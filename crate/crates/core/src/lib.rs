//! Station-based car-sharing fleet rebalancing.
//!
//! Compares four relocation regimes on the same demand: no relocation,
//! standard cars moved one at a time, stackable vehicles moved as trains, and
//! self-driving vehicles. Alongside the simulator the crate computes two
//! analytical fleet sizes: the fleet needed without relocation and the
//! fluid-model fleet under optimal rebalancing.

pub mod bundle;
pub mod demand;
pub mod domain;
pub mod fleet;
pub mod io;
pub mod rebalance;
pub mod reference;
pub mod report;
pub mod sim;
pub mod sweep;

pub use domain::{DemandTrace, Seconds, Station, StationId, TravelTimeMatrix, TripRequest};
pub use sim::{simulate, SimulationConfig, SimulationMetrics, Strategy};
