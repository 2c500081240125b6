//! Deterministic discrete-event simulation of a station-based fleet.
//!
//! Events at the same second run in a fixed order: vehicle arrivals,
//! relocators reaching feeders, relocation ticks, idle-relocator
//! reassignment, then pickup requests. Remaining ties follow scheduling order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::domain::{DemandTrace, Seconds, StationId, TripRequest};
use crate::rebalance::{
    autonomous_dispatch, classify_stations, compute_balance, match_feeders_recipients,
    match_relocators, Arrival, CapacityMode, ControlPolicy, FeederRecipientPair, IdleRelocator,
    RelocationTask, RelocatorId, Window,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    None,
    Standard,
    Stackable,
    Autonomous,
}

impl Strategy {
    pub const ALL: [Strategy; 4] =
        [Strategy::None, Strategy::Standard, Strategy::Stackable, Strategy::Autonomous];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Standard => "standard",
            Strategy::Stackable => "stackable",
            Strategy::Autonomous => "autonomous",
        }
    }

    pub fn needs_relocators(self) -> bool {
        matches!(self, Strategy::Standard | Strategy::Stackable)
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// How standard-car relocators reach the vehicle they move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardMode {
    /// Two workers share a service car; one team per two relocators.
    Pair,
    /// One worker cycles to the feeder on a folding bike.
    #[default]
    Bike,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "vehicles")]
pub enum Placement {
    /// Proportional to each station's outflow over the first two hours,
    /// remainder by largest fractional part.
    #[default]
    ProportionalToOutflow,
    Uniform,
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub fleet_size: u32,
    pub placement: Placement,
    pub strategy: Strategy,
    /// Relocation interval `T` in seconds.
    pub interval: Seconds,
    /// Maximum train size `v_T`.
    pub train_size: u32,
    pub relocators: u32,
    /// Start station per relocator unit; round-robin by id when absent.
    pub relocator_starts: Option<Vec<StationId>>,
    pub capacity_mode: CapacityMode,
    pub control: ControlPolicy,
    pub reassign_on_idle: bool,
    pub standard_mode: StandardMode,
    pub bike_factor: f64,
    /// Verify conservation invariants after every event.
    pub check_invariants: bool,
    pub record_events: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            fleet_size: 350,
            placement: Placement::default(),
            strategy: Strategy::Stackable,
            interval: 900,
            train_size: 8,
            relocators: 30,
            relocator_starts: None,
            capacity_mode: CapacityMode::TrainCar,
            control: ControlPolicy::Zero,
            reassign_on_idle: true,
            standard_mode: StandardMode::Bike,
            bike_factor: 3.0,
            check_invariants: false,
            record_events: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("relocation interval must be positive")]
    ZeroInterval,
    #[error("strategy `{0}` needs at least one relocator unit")]
    NoRelocators(&'static str),
    #[error("stackable vehicles need a train size of at least 2, got {0}")]
    TrainTooShort(u32),
    #[error("bike factor must be positive and finite")]
    BikeFactor,
    #[error("explicit placement lists {got} stations, scenario has {expected}")]
    PlacementLength { got: usize, expected: usize },
    #[error("explicit placement holds {placed} vehicles but fleet size is {fleet}")]
    PlacementTotal { placed: u64, fleet: u32 },
    #[error("{got} relocator start stations given, {needed} needed")]
    RelocatorStarts { got: usize, needed: u32 },
    #[error("station {0} does not exist")]
    UnknownStation(StationId),
    #[error("scenario has no stations but the fleet is not empty")]
    NoStations,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invariant violated at t={time}: {what}")]
    Invariant { time: Seconds, what: String },
}

impl SimulationConfig {
    /// Relocators that act as one unit, counted as units.
    pub fn relocator_units(&self) -> u32 {
        match (self.strategy, self.standard_mode) {
            (Strategy::Standard, StandardMode::Pair) => self.relocators / 2,
            (Strategy::Standard | Strategy::Stackable, _) => self.relocators,
            _ => 0,
        }
    }

    pub fn workers_per_unit(&self) -> u32 {
        match (self.strategy, self.standard_mode) {
            (Strategy::Standard, StandardMode::Pair) => 2,
            _ => 1,
        }
    }

    /// Per-pair vehicle cap used by the matching; `None` is unbounded.
    pub fn train_cap(&self) -> Option<u32> {
        match self.strategy {
            Strategy::Standard => Some(1),
            Strategy::Stackable => Some(self.capacity_mode.effective(self.train_size)),
            Strategy::None | Strategy::Autonomous => None,
        }
    }

    pub fn approach_factor(&self) -> f64 {
        match (self.strategy, self.standard_mode) {
            (Strategy::Standard, StandardMode::Bike) => self.bike_factor,
            _ => 1.0,
        }
    }

    pub fn validate(&self, stations: usize) -> Result<(), ConfigError> {
        if self.interval == 0 {
            return Err(ConfigError::ZeroInterval);
        }
        if self.strategy.needs_relocators() && self.relocator_units() == 0 {
            return Err(ConfigError::NoRelocators(self.strategy.name()));
        }
        if self.strategy == Strategy::Stackable && self.train_size < 2 {
            return Err(ConfigError::TrainTooShort(self.train_size));
        }
        if !(self.bike_factor.is_finite() && self.bike_factor > 0.0) {
            return Err(ConfigError::BikeFactor);
        }
        if let Placement::Explicit(v) = &self.placement {
            if v.len() != stations {
                return Err(ConfigError::PlacementLength { got: v.len(), expected: stations });
            }
            let placed: u64 = v.iter().map(|&x| x as u64).sum();
            if placed != self.fleet_size as u64 {
                return Err(ConfigError::PlacementTotal { placed, fleet: self.fleet_size });
            }
        }
        if stations == 0 && self.fleet_size > 0 {
            return Err(ConfigError::NoStations);
        }
        let units = self.relocator_units();
        if let Some(starts) = &self.relocator_starts {
            if (starts.len() as u64) < units as u64 {
                return Err(ConfigError::RelocatorStarts { got: starts.len(), needed: units });
            }
            if let Some(&s) = starts.iter().find(|s| s.index() >= stations) {
                return Err(ConfigError::UnknownStation(s));
            }
        }
        Ok(())
    }
}

/// Vehicles at each station at time zero.
pub fn initial_placement(trace: &DemandTrace, cfg: &SimulationConfig) -> Vec<u32> {
    let n = trace.station_count();
    let weights: Vec<u64> = match &cfg.placement {
        Placement::Explicit(v) => return v.clone(),
        Placement::Uniform => vec![1; n],
        Placement::ProportionalToOutflow => {
            let mut w = vec![0u64; n];
            for t in trace.trips_between(0, 2 * 3600) {
                w[t.origin.index()] += 1;
            }
            if w.iter().all(|&x| x == 0) {
                vec![1; n]
            } else {
                w
            }
        }
    };
    largest_remainder(cfg.fleet_size as u64, &weights)
}

fn largest_remainder(total: u64, weights: &[u64]) -> Vec<u32> {
    let sum: u64 = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<u32> = weights.iter().map(|&w| (total * w / sum) as u32).collect();
    let assigned: u64 = out.iter().map(|&x| x as u64).sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| (Reverse(total * weights[i] % sum), i));
    for &i in order.iter().take((total - assigned) as usize) {
        out[i] += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMetrics {
    pub total_requests: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub acceptance: f64,
    /// Relocator-seconds spent busy in each minute of the run.
    pub busy_seconds_per_minute: Vec<u64>,
    /// `train_lengths[v]` counts executed tasks that moved `v` vehicles.
    pub train_lengths: Vec<u64>,
    pub rejections_per_station: Vec<u64>,
    pub relocated_vehicles: u64,
    pub relocation_tasks: u64,
    /// Tasks that found no vehicle at the feeder.
    pub aborted_tasks: u64,
    /// Planned vehicles that were not available when loading.
    pub shortfall_vehicles: u64,
    /// Total relocator time from departure to task end, seconds.
    pub relocator_busy_time: u64,
    pub relocator_units: u32,
    pub workers_per_unit: u32,
    pub end_time: Seconds,
}

impl SimulationMetrics {
    /// Mean number of busy relocator units in each minute.
    pub fn busy_series(&self) -> Vec<f64> {
        self.busy_seconds_per_minute.iter().map(|&s| s as f64 / 60.0).collect()
    }

    pub fn mean_train_length(&self) -> Option<f64> {
        let tasks: u64 = self.train_lengths.iter().sum();
        if tasks == 0 {
            return None;
        }
        let moved: u64 = self.train_lengths.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
        Some(moved as f64 / tasks as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    PickupAccepted,
    PickupRejected,
    CustomerArrival,
    VehicleArrival,
    RelocationArrival,
    RelocatorAtFeeder,
    RelocationTick,
    RelocatorIdle,
    TaskStart,
    Shortfall,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::PickupAccepted => "pickup-accepted",
            EventKind::PickupRejected => "pickup-rejected",
            EventKind::CustomerArrival => "customer-arrival",
            EventKind::VehicleArrival => "vehicle-arrival",
            EventKind::RelocationArrival => "relocation-arrival",
            EventKind::RelocatorAtFeeder => "relocator-at-feeder",
            EventKind::RelocationTick => "relocation-tick",
            EventKind::RelocatorIdle => "relocator-idle",
            EventKind::TaskStart => "task-start",
            EventKind::Shortfall => "shortfall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: Seconds,
    pub kind: EventKind,
    pub station: Option<StationId>,
    /// Vehicles involved, trip id or tick number depending on the kind.
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub metrics: SimulationMetrics,
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pending {
    CustomerArrival(StationId),
    VehicleArrival(StationId),
    RelocationArrival(usize),
    RelocatorAtFeeder(usize),
    Tick(u64),
    RelocatorIdle,
}

impl Pending {
    fn priority(self) -> u8 {
        match self {
            Pending::CustomerArrival(_) | Pending::VehicleArrival(_) | Pending::RelocationArrival(_) => 0,
            Pending::RelocatorAtFeeder(_) => 1,
            Pending::Tick(_) => 2,
            Pending::RelocatorIdle => 3,
        }
    }
}

const PICKUP_PRIORITY: u8 = 4;

#[derive(Debug, Clone, Copy)]
enum Status {
    Idle,
    Busy(usize),
}

#[derive(Debug, Clone, Copy)]
struct Relocator {
    station: StationId,
    status: Status,
}

#[derive(Debug, Clone, Copy)]
struct ActiveTask {
    plan: RelocationTask,
    loaded: u32,
}

struct Sim<'a> {
    trace: &'a DemandTrace,
    cfg: &'a SimulationConfig,
    cap: Option<u32>,
    units: u32,
    queue: BinaryHeap<Reverse<(Seconds, u8, u64, Pending)>>,
    seq: u64,
    now: Seconds,

    parked: Vec<u32>,
    with_customers: u64,
    in_trains: u64,
    autonomous_in_transit: u64,
    committed: Vec<u32>,
    relocators: Vec<Relocator>,
    tasks: Vec<ActiveTask>,
    backlog: Vec<FeederRecipientPair>,

    metrics: SimulationMetrics,
    events: Vec<EventRecord>,
}

/// Runs `trace` under `cfg`.
pub fn simulate(trace: &DemandTrace, cfg: &SimulationConfig) -> Result<SimulationOutput, SimError> {
    cfg.validate(trace.station_count())?;
    let mut sim = Sim::new(trace, cfg);
    sim.run()?;
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new(trace: &'a DemandTrace, cfg: &'a SimulationConfig) -> Self {
        let n = trace.station_count();
        let units = cfg.relocator_units();
        let relocators = (0..units as usize)
            .map(|k| Relocator {
                station: match &cfg.relocator_starts {
                    Some(s) => s[k],
                    None => StationId::from(k % n.max(1)),
                },
                status: Status::Idle,
            })
            .collect();
        let metrics = SimulationMetrics {
            total_requests: trace.trips.len() as u64,
            accepted: 0,
            rejected: 0,
            acceptance: 1.0,
            busy_seconds_per_minute: Vec::new(),
            train_lengths: Vec::new(),
            rejections_per_station: vec![0; n],
            relocated_vehicles: 0,
            relocation_tasks: 0,
            aborted_tasks: 0,
            shortfall_vehicles: 0,
            relocator_busy_time: 0,
            relocator_units: units,
            workers_per_unit: cfg.workers_per_unit(),
            end_time: 0,
        };
        Sim {
            trace,
            cfg,
            cap: cfg.train_cap(),
            units,
            queue: BinaryHeap::new(),
            seq: 0,
            now: 0,
            parked: initial_placement(trace, cfg),
            with_customers: 0,
            in_trains: 0,
            autonomous_in_transit: 0,
            committed: vec![0; n],
            relocators,
            tasks: Vec::new(),
            backlog: Vec::new(),
            metrics,
            events: Vec::new(),
        }
    }

    fn schedule(&mut self, time: Seconds, ev: Pending) {
        self.seq += 1;
        self.queue.push(Reverse((time, ev.priority(), self.seq, ev)));
    }

    fn log(&mut self, kind: EventKind, station: Option<StationId>, value: u64) {
        if self.cfg.record_events {
            self.events.push(EventRecord { time: self.now, kind, station, value });
        }
    }

    fn run(&mut self) -> Result<(), SimError> {
        if self.cfg.strategy != Strategy::None && self.trace.horizon > 0 {
            self.schedule(0, Pending::Tick(0));
        }
        let trips = &self.trace.trips;
        let mut next_trip = 0;
        let mut processed = 0u64;

        loop {
            let trip_key = trips.get(next_trip).map(|t| (t.request_time, PICKUP_PRIORITY));
            let queue_key = self.queue.peek().map(|Reverse((t, p, _, _))| (*t, *p));
            let take_queue = match (queue_key, trip_key) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(q), Some(p)) => q < p,
            };
            if take_queue {
                let Reverse((t, _, _, ev)) = self.queue.pop().expect("peeked");
                self.now = t;
                self.handle(ev);
            } else {
                let trip = trips[next_trip];
                next_trip += 1;
                processed += 1;
                self.now = trip.request_time;
                self.pickup(&trip);
            }
            if self.cfg.check_invariants {
                self.check(processed)?;
            }
        }
        Ok(())
    }

    fn check(&self, processed: u64) -> Result<(), SimError> {
        let fail = |what: String| Err(SimError::Invariant { time: self.now, what });
        let parked: u64 = self.parked.iter().map(|&p| p as u64).sum();
        let total = parked + self.with_customers + self.in_trains + self.autonomous_in_transit;
        if total != self.cfg.fleet_size as u64 {
            return fail(format!("fleet conservation: {total} vehicles accounted, fleet {}", self.cfg.fleet_size));
        }
        if self.metrics.accepted + self.metrics.rejected != processed {
            return fail(format!(
                "{} accepted + {} rejected != {processed} requests",
                self.metrics.accepted, self.metrics.rejected
            ));
        }
        let busy = self.relocators.iter().filter(|r| matches!(r.status, Status::Busy(_))).count();
        if busy > self.units as usize {
            return fail(format!("{busy} busy relocators out of {}", self.units));
        }
        for (i, &c) in self.committed.iter().enumerate() {
            let pending: u32 = self
                .relocators
                .iter()
                .filter_map(|r| match r.status {
                    Status::Busy(k) if self.tasks[k].loaded == 0 && self.tasks[k].plan.feeder.index() == i => {
                        Some(self.tasks[k].plan.vehicles)
                    }
                    _ => None,
                })
                .sum();
            if pending != c {
                return fail(format!("station {i}: {c} committed, {pending} pending loads"));
            }
        }
        if let Some(cap) = self.cap {
            if self.metrics.train_lengths.len() > cap as usize + 1 {
                return fail(format!("train longer than cap {cap}"));
            }
        }
        Ok(())
    }

    fn pickup(&mut self, trip: &TripRequest) {
        let o = trip.origin.index();
        if self.parked[o] > 0 {
            self.parked[o] -= 1;
            self.with_customers += 1;
            self.metrics.accepted += 1;
            self.schedule(trip.dropoff_time(), Pending::CustomerArrival(trip.destination));
            self.log(EventKind::PickupAccepted, Some(trip.origin), trip.id);
        } else {
            self.metrics.rejected += 1;
            self.metrics.rejections_per_station[o] += 1;
            self.log(EventKind::PickupRejected, Some(trip.origin), trip.id);
        }
    }

    fn handle(&mut self, ev: Pending) {
        match ev {
            Pending::CustomerArrival(s) => {
                self.parked[s.index()] += 1;
                self.with_customers -= 1;
                self.log(EventKind::CustomerArrival, Some(s), 1);
            }
            Pending::VehicleArrival(s) => {
                self.parked[s.index()] += 1;
                self.autonomous_in_transit -= 1;
                self.log(EventKind::VehicleArrival, Some(s), 1);
            }
            Pending::RelocatorAtFeeder(k) => self.load(k),
            Pending::RelocationArrival(k) => self.unload(k),
            Pending::Tick(k) => self.tick(k),
            Pending::RelocatorIdle => {
                self.log(EventKind::RelocatorIdle, None, self.backlog.len() as u64);
                if !self.backlog.is_empty() {
                    let backlog = std::mem::take(&mut self.backlog);
                    self.assign(&backlog);
                }
            }
        }
    }

    fn tick(&mut self, k: u64) {
        let interval = self.cfg.interval;
        let window = Window::nth(k, interval);
        if window.end() < self.trace.horizon {
            self.schedule(window.end(), Pending::Tick(k + 1));
        }
        self.log(EventKind::RelocationTick, None, k);
        self.backlog.clear();

        let arrivals = self.pending_arrivals();
        let forecast = self.trace.trips_between(window.start, window.end());
        let snapshot =
            compute_balance(window, &self.parked, &arrivals, forecast, &self.committed, self.cfg.control);
        debug_assert!(snapshot.is_consistent());
        let classes = classify_stations(&snapshot);
        let (pairs, _) =
            match_feeders_recipients(&classes.feeders, &classes.recipients, self.cap, &self.trace.travel_times);

        match self.cfg.strategy {
            Strategy::None => {}
            Strategy::Autonomous => {
                for m in autonomous_dispatch(&pairs, &self.trace.travel_times, self.now) {
                    let from = m.from.index();
                    if self.parked[from] == 0 {
                        self.metrics.shortfall_vehicles += 1;
                        self.log(EventKind::Shortfall, Some(m.from), 1);
                        continue;
                    }
                    self.parked[from] -= 1;
                    self.autonomous_in_transit += 1;
                    self.metrics.relocated_vehicles += 1;
                    self.schedule(m.arrive, Pending::VehicleArrival(m.to));
                }
            }
            Strategy::Standard | Strategy::Stackable => self.assign(&pairs),
        }
    }

    /// Vehicles on the road and where they will be parked.
    fn pending_arrivals(&self) -> Vec<Arrival> {
        let mut out = Vec::new();
        for Reverse((time, _, _, ev)) in self.queue.iter() {
            let (station, vehicles) = match *ev {
                Pending::CustomerArrival(s) | Pending::VehicleArrival(s) => (s, 1),
                Pending::RelocationArrival(k) => (self.tasks[k].plan.recipient, self.tasks[k].loaded),
                Pending::RelocatorAtFeeder(k) => {
                    let p = self.tasks[k].plan;
                    out.push(Arrival { station: p.recipient, time: p.recipient_arrival, vehicles: p.vehicles });
                    continue;
                }
                _ => continue,
            };
            out.push(Arrival { station, time: *time, vehicles });
        }
        out
    }

    fn idle_relocators(&self) -> Vec<IdleRelocator> {
        self.relocators
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r.status, Status::Idle))
            .map(|(id, r)| IdleRelocator { id: id as RelocatorId, station: r.station })
            .collect()
    }

    fn assign(&mut self, pairs: &[FeederRecipientPair]) {
        let idle = self.idle_relocators();
        let matching =
            match_relocators(pairs, &idle, &self.trace.travel_times, self.now, self.cfg.approach_factor());
        for plan in matching.tasks {
            let k = self.tasks.len();
            self.tasks.push(ActiveTask { plan, loaded: 0 });
            self.relocators[plan.relocator as usize].status = Status::Busy(k);
            self.committed[plan.feeder.index()] += plan.vehicles;
            self.schedule(plan.feeder_arrival, Pending::RelocatorAtFeeder(k));
            self.log(EventKind::TaskStart, Some(plan.feeder), plan.vehicles as u64);
        }
        self.backlog = matching.backlog;
    }

    fn load(&mut self, k: usize) {
        let plan = self.tasks[k].plan;
        let f = plan.feeder.index();
        self.committed[f] -= plan.vehicles;
        let loaded = plan.vehicles.min(self.parked[f]);
        self.log(EventKind::RelocatorAtFeeder, Some(plan.feeder), loaded as u64);
        if loaded < plan.vehicles {
            self.metrics.shortfall_vehicles += (plan.vehicles - loaded) as u64;
            self.log(EventKind::Shortfall, Some(plan.feeder), (plan.vehicles - loaded) as u64);
        }
        if loaded == 0 {
            self.metrics.aborted_tasks += 1;
            self.release(plan.relocator, plan.feeder, plan.depart);
            return;
        }
        self.parked[f] -= loaded;
        self.in_trains += loaded as u64;
        self.tasks[k].loaded = loaded;
        let arrive = self.now + self.trace.travel_times.get(plan.feeder, plan.recipient);
        self.schedule(arrive, Pending::RelocationArrival(k));
    }

    fn unload(&mut self, k: usize) {
        let ActiveTask { plan, loaded } = self.tasks[k];
        self.parked[plan.recipient.index()] += loaded;
        self.in_trains -= loaded as u64;
        self.metrics.relocated_vehicles += loaded as u64;
        self.metrics.relocation_tasks += 1;
        let len = loaded as usize;
        if self.metrics.train_lengths.len() <= len {
            self.metrics.train_lengths.resize(len + 1, 0);
        }
        self.metrics.train_lengths[len] += 1;
        self.log(EventKind::RelocationArrival, Some(plan.recipient), loaded as u64);
        self.release(plan.relocator, plan.recipient, plan.depart);
    }

    fn release(&mut self, relocator: RelocatorId, at: StationId, since: Seconds) {
        self.relocators[relocator as usize] = Relocator { station: at, status: Status::Idle };
        self.add_busy(since, self.now);
        if self.cfg.reassign_on_idle {
            self.schedule(self.now, Pending::RelocatorIdle);
        }
    }

    fn add_busy(&mut self, from: Seconds, to: Seconds) {
        self.metrics.relocator_busy_time += to - from;
        let buckets = &mut self.metrics.busy_seconds_per_minute;
        let last = to.div_ceil(60) as usize;
        if buckets.len() < last {
            buckets.resize(last, 0);
        }
        let mut t = from;
        while t < to {
            let edge = (t / 60 + 1) * 60;
            let end = edge.min(to);
            buckets[(t / 60) as usize] += end - t;
            t = end;
        }
    }

    fn finish(mut self) -> SimulationOutput {
        let end = self.now.max(self.trace.horizon);
        self.metrics.end_time = end;
        let minutes = end.div_ceil(60) as usize;
        if self.metrics.busy_seconds_per_minute.len() < minutes {
            self.metrics.busy_seconds_per_minute.resize(minutes, 0);
        }
        let m = &mut self.metrics;
        m.acceptance = if m.total_requests == 0 { 1.0 } else { m.accepted as f64 / m.total_requests as f64 };
        SimulationOutput { metrics: self.metrics, events: self.events }
    }
}
