//! Shared scenario vocabulary: stations, trips, travel times and demand traces.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Whole seconds from scenario start.
pub type Seconds = u64;

/// Dense station index in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub u32);

impl StationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for StationId {
    fn from(i: usize) -> Self {
        StationId(i as u32)
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A parking station. Coordinates are planar meters in a scenario-local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub x: f64,
    pub y: f64,
}

impl Station {
    pub fn new(id: impl Into<StationId>, x: f64, y: f64) -> Self {
        Station { id: id.into(), x, y }
    }

    pub fn distance(&self, other: &Station) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Dense row-major matrix of vehicle travel times in seconds.
///
/// Entry `(i, j)` is the time to drive from station `i` to station `j`. Not
/// required to be symmetric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TravelTimeMatrix {
    n: usize,
    secs: Vec<Seconds>,
}

impl TravelTimeMatrix {
    /// Builds a matrix from rows. Fails when the rows are not square or the
    /// diagonal is non-zero.
    pub fn from_rows(rows: Vec<Vec<Seconds>>) -> Result<Self, DomainError> {
        let n = rows.len();
        let mut secs = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(DomainError::MatrixShape { row: i, len: row.len(), expected: n });
            }
            if row[i] != 0 {
                return Err(DomainError::NonZeroDiagonal { station: i, value: row[i] });
            }
            secs.extend(row);
        }
        Ok(TravelTimeMatrix { n, secs })
    }

    /// Every off-diagonal entry equal to `t`.
    pub fn uniform(n: usize, t: Seconds) -> Self {
        let mut secs = vec![t; n * n];
        for i in 0..n {
            secs[i * n + i] = 0;
        }
        TravelTimeMatrix { n, secs }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: StationId, to: StationId) -> Seconds {
        self.secs[from.index() * self.n + to.index()]
    }

    pub fn set(&mut self, from: StationId, to: StationId, t: Seconds) {
        if from != to {
            self.secs[from.index() * self.n + to.index()] = t;
        }
    }

    pub fn row(&self, from: StationId) -> &[Seconds] {
        let i = from.index();
        &self.secs[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Seconds]> {
        self.secs.chunks(self.n.max(1)).take(self.n)
    }
}

/// One customer pickup request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripRequest {
    pub id: u64,
    pub origin: StationId,
    pub destination: StationId,
    pub request_time: Seconds,
    pub travel_time: Seconds,
}

impl TripRequest {
    #[inline]
    pub fn dropoff_time(&self) -> Seconds {
        self.request_time + self.travel_time
    }

    pub fn is_round_trip(&self) -> bool {
        self.origin == self.destination
    }
}

/// A full scenario: stations, travel times and the ordered trip requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandTrace {
    pub stations: Vec<Station>,
    pub travel_times: TravelTimeMatrix,
    pub trips: Vec<TripRequest>,
    pub horizon: Seconds,
}

impl DemandTrace {
    /// Assembles a trace and sorts trips by `(request_time, id)`.
    pub fn new(
        stations: Vec<Station>,
        travel_times: TravelTimeMatrix,
        mut trips: Vec<TripRequest>,
        horizon: Seconds,
    ) -> Self {
        trips.sort_by_key(|t| (t.request_time, t.id));
        DemandTrace { stations, travel_times, trips, horizon }
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn station_ids(&self) -> impl Iterator<Item = StationId> {
        (0..self.stations.len()).map(StationId::from)
    }

    /// Trips whose request time lies in `[from, to)`.
    pub fn trips_between(&self, from: Seconds, to: Seconds) -> &[TripRequest] {
        let lo = self.trips.partition_point(|t| t.request_time < from);
        let hi = self.trips.partition_point(|t| t.request_time < to);
        &self.trips[lo..hi.max(lo)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("travel-time row {row} has {len} entries, expected {expected}")]
    MatrixShape { row: usize, len: usize, expected: usize },
    #[error("travel time from station {station} to itself is {value}, expected 0")]
    NonZeroDiagonal { station: usize, value: Seconds },
}

/// A single broken trace invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    StationIdNotDense { position: usize, id: StationId },
    NonFiniteCoordinates { station: StationId },
    MatrixSizeMismatch { stations: usize, matrix: usize },
    UnknownStation { trip: u64, station: StationId },
    OutOfHorizon { trip: u64, request_time: Seconds, horizon: Seconds },
    Unsorted { trip: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Trips with origin equal to destination. Allowed, listed for visibility.
    pub round_trips: Vec<u64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every trace invariant and lists what is broken.
///
/// Negative travel times cannot be represented by [`TripRequest`]; file
/// loaders reject them at parse time.
pub fn validate_scenario(trace: &DemandTrace) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = trace.stations.len();

    for (pos, s) in trace.stations.iter().enumerate() {
        if s.id.index() != pos {
            report.violations.push(Violation::StationIdNotDense { position: pos, id: s.id });
        }
        if !(s.x.is_finite() && s.y.is_finite()) {
            report.violations.push(Violation::NonFiniteCoordinates { station: s.id });
        }
    }
    if trace.travel_times.len() != n {
        report.violations.push(Violation::MatrixSizeMismatch {
            stations: n,
            matrix: trace.travel_times.len(),
        });
    }

    let mut prev: Option<(Seconds, u64)> = None;
    for trip in &trace.trips {
        for station in [trip.origin, trip.destination] {
            if station.index() >= n {
                report.violations.push(Violation::UnknownStation { trip: trip.id, station });
            }
        }
        if trip.request_time >= trace.horizon {
            report.violations.push(Violation::OutOfHorizon {
                trip: trip.id,
                request_time: trip.request_time,
                horizon: trace.horizon,
            });
        }
        let key = (trip.request_time, trip.id);
        if prev.is_some_and(|p| p > key) {
            report.violations.push(Violation::Unsorted { trip: trip.id });
        }
        prev = Some(key);
        if trip.is_round_trip() {
            report.round_trips.push(trip.id);
        }
    }
    report
}

/// Inflow minus outflow per station over the whole horizon.
pub fn station_daily_unbalance(trace: &DemandTrace) -> Vec<i64> {
    station_unbalance_between(trace, 0, Seconds::MAX)
}

/// Inflow minus outflow per station, counting trips requested in `[from, to)`.
pub fn station_unbalance_between(trace: &DemandTrace, from: Seconds, to: Seconds) -> Vec<i64> {
    let mut net = vec![0i64; trace.stations.len()];
    for trip in trace.trips_between(from, to) {
        net[trip.destination.index()] += 1;
        net[trip.origin.index()] -= 1;
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_station_trace(trips: Vec<TripRequest>, horizon: Seconds) -> DemandTrace {
        DemandTrace::new(
            vec![Station::new(0usize, 0.0, 0.0), Station::new(1usize, 1000.0, 0.0)],
            TravelTimeMatrix::uniform(2, 100),
            trips,
            horizon,
        )
    }

    fn trip(id: u64, o: u32, d: u32, t: Seconds) -> TripRequest {
        TripRequest {
            id,
            origin: StationId(o),
            destination: StationId(d),
            request_time: t,
            travel_time: 100,
        }
    }

    #[test]
    fn well_formed_trace_has_empty_report() {
        let trace = two_station_trace(vec![trip(0, 0, 1, 10)], 3600);
        let report = validate_scenario(&trace);
        assert!(report.is_valid());
        assert!(report.round_trips.is_empty());
    }

    #[test]
    fn unknown_station_is_reported_once() {
        let trace = two_station_trace(vec![trip(0, 2, 1, 10)], 3600);
        let report = validate_scenario(&trace);
        assert_eq!(
            report.violations,
            vec![Violation::UnknownStation { trip: 0, station: StationId(2) }]
        );
    }

    #[test]
    fn request_at_horizon_is_out_of_range() {
        let trace = two_station_trace(vec![trip(0, 0, 1, 3600)], 3600);
        let report = validate_scenario(&trace);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::OutOfHorizon { .. }));
    }

    #[test]
    fn round_trips_are_listed_not_rejected() {
        let trace = two_station_trace(vec![trip(0, 1, 1, 0)], 3600);
        let report = validate_scenario(&trace);
        assert!(report.is_valid());
        assert_eq!(report.round_trips, vec![0]);
    }

    #[test]
    fn unsorted_trips_are_flagged() {
        let mut trace = two_station_trace(vec![trip(0, 0, 1, 10), trip(1, 0, 1, 20)], 3600);
        trace.trips.swap(0, 1);
        let report = validate_scenario(&trace);
        assert_eq!(report.violations, vec![Violation::Unsorted { trip: 0 }]);
    }

    #[test]
    fn validation_is_pure() {
        let trace = two_station_trace(vec![trip(0, 3, 1, 9000)], 3600);
        assert_eq!(validate_scenario(&trace), validate_scenario(&trace));
    }

    #[test]
    fn unbalance_counts_in_minus_out() {
        assert_eq!(station_daily_unbalance(&two_station_trace(vec![], 3600)), vec![0, 0]);
        let trace = two_station_trace(
            vec![trip(0, 0, 1, 0), trip(1, 0, 1, 5), trip(2, 1, 0, 9)],
            3600,
        );
        assert_eq!(station_daily_unbalance(&trace), vec![-1, 1]);
    }

    #[test]
    fn matrix_rejects_bad_shapes() {
        assert!(matches!(
            TravelTimeMatrix::from_rows(vec![vec![0, 1], vec![1]]),
            Err(DomainError::MatrixShape { row: 1, .. })
        ));
        assert!(matches!(
            TravelTimeMatrix::from_rows(vec![vec![0, 1], vec![1, 4]]),
            Err(DomainError::NonZeroDiagonal { station: 1, value: 4 })
        ));
    }

    #[test]
    fn trips_between_is_half_open() {
        let trace = two_station_trace(
            vec![trip(0, 0, 1, 0), trip(1, 0, 1, 60), trip(2, 1, 0, 120)],
            3600,
        );
        let ids: Vec<u64> = trace.trips_between(0, 120).iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![0, 1]);
        assert!(trace.trips_between(500, 100).is_empty());
    }
}
