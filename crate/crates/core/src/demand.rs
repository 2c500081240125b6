//! Grid station deployment and synthetic demand generation.
//!
//! Trips are drawn from independent time-inhomogeneous Poisson processes,
//! one per origin-destination pair and demand layer, sampled by thinning.
//!
//! The random stream is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Uniform variates take the top 53 bits of each
//! `next_u64()` and scale by 2^-53, so a trace is reproducible from its seed on
//! any platform. Pairs are visited layer by layer in row-major order.

use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::domain::{DemandTrace, Seconds, Station, StationId, TravelTimeMatrix, TripRequest};

pub const DEFAULT_CELL_SIDE_M: f64 = 1000.0;
/// 30 km/h.
pub const DEFAULT_SPEED_MPS: f64 = 8.33;
pub const DAY: Seconds = 24 * 3600;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DemandError {
    #[error("cell side must be positive and finite, got {0}")]
    CellSide(f64),
    #[error("bounding box is degenerate")]
    DegenerateBox,
    #[error("speed must be positive and finite, got {0}")]
    Speed(f64),
    #[error("rate matrix has {got} entries, expected {expected}")]
    RateShape { got: usize, expected: usize },
    #[error("rates and multipliers must be finite and non-negative")]
    NegativeRate,
    #[error("profile covers {profile} stations but {stations} were given")]
    StationCount { profile: usize, stations: usize },
    #[error("travel-time matrix covers {matrix} stations but {stations} were given")]
    MatrixSize { matrix: usize, stations: usize },
    #[error("at least two stations are required")]
    TooFewStations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    /// Smallest box holding every point, or `None` for an empty slice.
    pub fn around(points: &[(f64, f64)]) -> Option<Self> {
        let (&(x0, y0), rest) = points.split_first()?;
        let mut b = BoundingBox { min_x: x0, min_y: y0, max_x: x0, max_y: y0 };
        for &(x, y) in rest {
            b.min_x = b.min_x.min(x);
            b.min_y = b.min_y.min(y);
            b.max_x = b.max_x.max(x);
            b.max_y = b.max_y.max(y);
        }
        Some(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDeploymentConfig {
    pub cell_side: f64,
    pub bbox: BoundingBox,
    pub facilities: Vec<(f64, f64)>,
}

/// Places one station at the centroid of every grid cell holding at least
/// one facility. Facilities outside the bounding box are ignored. Stations
/// are numbered row-major from the box's lower-left corner.
pub fn deploy_stations(cfg: &GridDeploymentConfig) -> Result<Vec<Station>, DemandError> {
    let side = cfg.cell_side;
    if !(side.is_finite() && side > 0.0) {
        return Err(DemandError::CellSide(side));
    }
    let b = cfg.bbox;
    let (w, h) = (b.max_x - b.min_x, b.max_y - b.min_y);
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(DemandError::DegenerateBox);
    }
    let cols = ((w / side).ceil() as u64).max(1);
    let rows = ((h / side).ceil() as u64).max(1);

    let occupied: BTreeSet<(u64, u64)> = cfg
        .facilities
        .iter()
        .filter(|&&(x, y)| b.contains(x, y))
        .map(|&(x, y)| {
            let c = (((x - b.min_x) / side).floor() as u64).min(cols - 1);
            let r = (((y - b.min_y) / side).floor() as u64).min(rows - 1);
            (r, c)
        })
        .collect();

    Ok(occupied
        .into_iter()
        .enumerate()
        .map(|(i, (r, c))| {
            Station::new(
                i,
                b.min_x + (c as f64 + 0.5) * side,
                b.min_y + (r as f64 + 0.5) * side,
            )
        })
        .collect())
}

/// Euclidean distance over `speed`, rounded to whole seconds.
pub fn derive_travel_times(
    stations: &[Station],
    speed_mps: f64,
) -> Result<TravelTimeMatrix, DemandError> {
    if !(speed_mps.is_finite() && speed_mps > 0.0) {
        return Err(DemandError::Speed(speed_mps));
    }
    let n = stations.len();
    let mut m = TravelTimeMatrix::uniform(n, 0);
    for a in stations {
        for b in stations {
            if a.id != b.id {
                m.set(a.id, b.id, (a.distance(b) / speed_mps).round() as Seconds);
            }
        }
    }
    Ok(m)
}

/// One additive demand component: a base rate per OD pair modulated by an
/// hour-of-day multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandLayer {
    /// Row-major `n x n`, trips per hour.
    pub rates: Vec<f64>,
    pub hourly: [f64; 24],
}

impl DemandLayer {
    fn max_multiplier(&self) -> f64 {
        self.hourly.iter().copied().fold(0.0, f64::max)
    }
}

/// Demand intensity over a horizon: the sum of its layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub stations: usize,
    pub layers: Vec<DemandLayer>,
    pub horizon: Seconds,
}

impl DemandProfile {
    /// Single layer with one hourly curve.
    pub fn single(stations: usize, rates: Vec<f64>, hourly: [f64; 24], horizon: Seconds) -> Self {
        DemandProfile { stations, layers: vec![DemandLayer { rates, hourly }], horizon }
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        let expected = self.stations * self.stations;
        for layer in &self.layers {
            if layer.rates.len() != expected {
                return Err(DemandError::RateShape { got: layer.rates.len(), expected });
            }
            let ok = |v: &f64| v.is_finite() && *v >= 0.0;
            if !layer.rates.iter().all(ok) || !layer.hourly.iter().all(ok) {
                return Err(DemandError::NegativeRate);
            }
        }
        Ok(())
    }

    /// Expected number of trips from `origin` to `destination` over the horizon.
    pub fn expected_pair_trips(&self, origin: StationId, destination: StationId) -> f64 {
        let k = origin.index() * self.stations + destination.index();
        self.layers
            .iter()
            .map(|l| l.rates[k] * hourly_integral(&l.hourly, self.horizon))
            .sum()
    }

    /// Expected total number of trips over the horizon.
    pub fn expected_trips(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.rates.iter().sum::<f64>() * hourly_integral(&l.hourly, self.horizon))
            .sum()
    }

    /// Multiplies every base rate by `c`.
    pub fn scale(&mut self, c: f64) {
        for l in &mut self.layers {
            l.rates.iter_mut().for_each(|r| *r *= c);
        }
    }
}

#[inline]
fn hour_of_day(t: f64) -> usize {
    ((t / 3600.0).floor() as u64 % 24) as usize
}

/// Integral of the multiplier curve over `[0, horizon)`, in hours.
fn hourly_integral(hourly: &[f64; 24], horizon: Seconds) -> f64 {
    let full = horizon / 3600;
    let rest = (horizon % 3600) as f64 / 3600.0;
    let mut acc = 0.0;
    for h in 0..full {
        acc += hourly[(h % 24) as usize];
    }
    acc + rest * hourly[(full % 24) as usize]
}

/// Uniform variates from a portable stream.
struct Uniform01(ChaCha8Rng);

impl Uniform01 {
    fn new(seed: u64) -> Self {
        Uniform01(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Value in `[0, 1)`.
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn exp(&mut self, rate: f64) -> f64 {
        -(1.0 - self.next()).ln() / rate
    }
}

/// Samples a trace from `profile`. Trip travel times come from `times`
/// (zero for round trips). Output is sorted and ids follow that order.
pub fn synthesize_demand(
    profile: &DemandProfile,
    stations: &[Station],
    times: &TravelTimeMatrix,
    seed: u64,
) -> Result<DemandTrace, DemandError> {
    profile.validate()?;
    let n = stations.len();
    if n < 2 {
        return Err(DemandError::TooFewStations);
    }
    if profile.stations != n {
        return Err(DemandError::StationCount { profile: profile.stations, stations: n });
    }
    if times.len() != n {
        return Err(DemandError::MatrixSize { matrix: times.len(), stations: n });
    }

    let horizon = profile.horizon as f64;
    let mut rng = Uniform01::new(seed);
    let mut raw: Vec<(Seconds, StationId, StationId)> = Vec::new();

    for layer in &profile.layers {
        let peak = layer.max_multiplier();
        if peak <= 0.0 {
            continue;
        }
        for (k, &base) in layer.rates.iter().enumerate() {
            if base <= 0.0 {
                continue;
            }
            let (o, d) = (StationId::from(k / n), StationId::from(k % n));
            let bound = base * peak / 3600.0;
            let mut t = 0.0;
            loop {
                t += rng.exp(bound);
                if t >= horizon {
                    break;
                }
                let keep = layer.hourly[hour_of_day(t)] / peak;
                if rng.next() < keep {
                    raw.push((t.floor() as Seconds, o, d));
                }
            }
        }
    }

    raw.sort_by_key(|&(t, _, _)| t);
    let trips = raw
        .into_iter()
        .enumerate()
        .map(|(i, (t, o, d))| TripRequest {
            id: i as u64,
            origin: o,
            destination: d,
            request_time: t,
            travel_time: times.get(o, d),
        })
        .collect();
    Ok(DemandTrace::new(stations.to_vec(), times.clone(), trips, profile.horizon))
}

/// Bell-shaped hourly curve centred on `peak_hour` (circular over the day).
pub fn peaked_curve(peak_hour: f64, spread_h: f64) -> [f64; 24] {
    let mut c = [0.0; 24];
    for (h, v) in c.iter_mut().enumerate() {
        let mut d = (h as f64 - peak_hour).abs();
        d = d.min(24.0 - d);
        *v = (-(d * d) / (2.0 * spread_h * spread_h)).exp();
    }
    c
}

/// 1.0 from 07:00 to 22:00, 0.1 otherwise.
pub fn daytime_curve() -> [f64; 24] {
    let mut c = [0.1; 24];
    c[7..22].iter_mut().for_each(|v| *v = 1.0);
    c
}

/// Indices of the "business" stations used by [`commuter_profile`]: the
/// 30% closest to the stations' centroid (at least one), ties by id.
pub fn business_stations(stations: &[Station]) -> Vec<StationId> {
    let n = stations.len();
    if n == 0 {
        return Vec::new();
    }
    let cx = stations.iter().map(|s| s.x).sum::<f64>() / n as f64;
    let cy = stations.iter().map(|s| s.y).sum::<f64>() / n as f64;
    let mut order: Vec<&Station> = stations.iter().collect();
    order.sort_by(|a, b| {
        let da = (a.x - cx).hypot(a.y - cy);
        let db = (b.x - cx).hypot(b.y - cy);
        da.total_cmp(&db).then(a.id.cmp(&b.id))
    });
    let k = (n * 3 / 10).max(1);
    let mut ids: Vec<StationId> = order[..k].iter().map(|s| s.id).collect();
    ids.sort();
    ids
}

/// Shape of the commuter preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommuterShape {
    /// Share of trips in the residential to business morning wave.
    pub morning_share: f64,
    /// Share of trips in the business to residential evening wave.
    pub evening_share: f64,
    /// Standard deviation of both waves, hours.
    pub spread_h: f64,
    pub morning_peak_h: f64,
    pub evening_peak_h: f64,
}

impl Default for CommuterShape {
    fn default() -> Self {
        CommuterShape {
            morning_share: 0.4,
            evening_share: 0.4,
            spread_h: 1.5,
            morning_peak_h: 8.0,
            evening_peak_h: 18.0,
        }
    }
}

/// Commuter demand: residential to business flows peaking in the morning,
/// the reverse in the evening, plus a uniform daytime background taking the
/// remaining share. Rates are scaled so the expected number of trips over
/// `horizon` is `total_trips`.
pub fn commuter_profile(stations: &[Station], total_trips: f64, horizon: Seconds) -> DemandProfile {
    commuter_profile_with(stations, total_trips, horizon, CommuterShape::default())
}

pub fn commuter_profile_with(
    stations: &[Station],
    total_trips: f64,
    horizon: Seconds,
    shape: CommuterShape,
) -> DemandProfile {
    let n = stations.len();
    let business = business_stations(stations);
    let is_business = |i: usize| business.binary_search(&StationId::from(i)).is_ok();

    let mut morning = vec![0.0; n * n];
    let mut evening = vec![0.0; n * n];
    let mut background = vec![0.0; n * n];
    for o in 0..n {
        for d in 0..n {
            if o == d {
                continue;
            }
            if !is_business(o) && is_business(d) {
                morning[o * n + d] = 1.0;
                evening[d * n + o] = 1.0;
            }
            background[o * n + d] = 1.0;
        }
    }

    let background_share = (1.0 - shape.morning_share - shape.evening_share).max(0.0);
    let mut layers = Vec::new();
    for (rates, hourly, share) in [
        (morning, peaked_curve(shape.morning_peak_h, shape.spread_h), shape.morning_share),
        (evening, peaked_curve(shape.evening_peak_h, shape.spread_h), shape.evening_share),
        (background, daytime_curve(), background_share),
    ] {
        let mut layer = DemandProfile::single(n, rates, hourly, horizon);
        let mass = layer.expected_trips();
        if mass > 0.0 && share > 0.0 {
            layer.scale(share * total_trips / mass);
            layers.extend(layer.layers);
        }
    }
    DemandProfile { stations: n, layers, horizon }
}

/// Regular `cols x rows` grid of stations spaced `spacing` meters apart.
pub fn grid_stations(cols: usize, rows: usize, spacing: f64) -> Vec<Station> {
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .enumerate()
        .map(|(i, (r, c))| Station::new(i, (c as f64 + 0.5) * spacing, (r as f64 + 0.5) * spacing))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(facilities: Vec<(f64, f64)>) -> GridDeploymentConfig {
        GridDeploymentConfig {
            cell_side: 1000.0,
            bbox: BoundingBox { min_x: 0.0, min_y: 0.0, max_x: 3000.0, max_y: 2000.0 },
            facilities,
        }
    }

    #[test]
    fn single_facility_gives_centroid_station() {
        let s = deploy_stations(&cfg(vec![(1234.0, 1999.0)])).unwrap();
        assert_eq!(s, vec![Station::new(0usize, 1500.0, 1500.0)]);
    }

    #[test]
    fn facilities_in_one_cell_share_a_station() {
        let s = deploy_stations(&cfg(vec![(10.0, 10.0), (990.0, 900.0)])).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn empty_facility_list_is_empty_deployment() {
        assert!(deploy_stations(&cfg(vec![])).unwrap().is_empty());
    }

    #[test]
    fn facility_on_far_edge_maps_to_last_cell() {
        let s = deploy_stations(&cfg(vec![(3000.0, 2000.0)])).unwrap();
        assert_eq!(s[0].x, 2500.0);
        assert_eq!(s[0].y, 1500.0);
    }

    #[test]
    fn invalid_grid_configs_are_rejected() {
        let mut c = cfg(vec![]);
        c.cell_side = 0.0;
        assert_eq!(deploy_stations(&c), Err(DemandError::CellSide(0.0)));
        let mut c = cfg(vec![]);
        c.bbox.max_x = 0.0;
        assert_eq!(deploy_stations(&c), Err(DemandError::DegenerateBox));
    }

    #[test]
    fn travel_times_from_distance() {
        let st = vec![Station::new(0usize, 0.0, 0.0), Station::new(1usize, 1000.0, 0.0)];
        let m = derive_travel_times(&st, 10.0).unwrap();
        assert_eq!(m.get(StationId(0), StationId(1)), 100);
        assert_eq!(m.get(StationId(1), StationId(0)), 100);
        assert_eq!(m.get(StationId(1), StationId(1)), 0);
        assert!(derive_travel_times(&st, 0.0).is_err());
    }

    #[test]
    fn collinear_stations_satisfy_triangle_equality() {
        let st = vec![
            Station::new(0usize, 0.0, 0.0),
            Station::new(1usize, 500.0, 0.0),
            Station::new(2usize, 1500.0, 0.0),
        ];
        let m = derive_travel_times(&st, 10.0).unwrap();
        let t = |a: u32, b: u32| m.get(StationId(a), StationId(b));
        assert_eq!(t(0, 1) + t(1, 2), t(0, 2));
    }

    #[test]
    fn zero_rates_give_empty_trace() {
        let st = grid_stations(2, 1, 1000.0);
        let m = derive_travel_times(&st, 10.0).unwrap();
        let p = DemandProfile::single(2, vec![0.0; 4], [1.0; 24], 3600);
        let trace = synthesize_demand(&p, &st, &m, 1).unwrap();
        assert!(trace.trips.is_empty());
    }

    #[test]
    fn hourly_integral_handles_partial_hours() {
        let mut c = [0.0; 24];
        c[0] = 1.0;
        c[1] = 2.0;
        assert_eq!(hourly_integral(&c, 5400), 2.0);
        assert_eq!(hourly_integral(&[1.0; 24], 3 * DAY), 72.0);
    }

    #[test]
    fn synthesis_is_seed_deterministic() {
        let st = grid_stations(3, 2, 1000.0);
        let m = derive_travel_times(&st, DEFAULT_SPEED_MPS).unwrap();
        let p = commuter_profile(&st, 300.0, DAY);
        let a = synthesize_demand(&p, &st, &m, 7).unwrap();
        let b = synthesize_demand(&p, &st, &m, 7).unwrap();
        let c = synthesize_demand(&p, &st, &m, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.trips, c.trips);
        assert!(crate::domain::validate_scenario(&a).is_valid());
    }

    #[test]
    fn commuter_profile_hits_target_volume() {
        let st = grid_stations(4, 4, 1000.0);
        let p = commuter_profile(&st, 1234.0, DAY);
        assert!((p.expected_trips() - 1234.0).abs() < 1e-9);
        assert_eq!(business_stations(&st).len(), 4);
    }

    #[test]
    fn profile_shape_is_checked() {
        let st = grid_stations(2, 1, 1000.0);
        let m = TravelTimeMatrix::uniform(2, 60);
        let bad = DemandProfile::single(2, vec![1.0; 3], [1.0; 24], 3600);
        assert!(matches!(
            synthesize_demand(&bad, &st, &m, 0),
            Err(DemandError::RateShape { got: 3, expected: 4 })
        ));
        let neg = DemandProfile::single(2, vec![0.0, -1.0, 0.0, 0.0], [1.0; 24], 3600);
        assert_eq!(synthesize_demand(&neg, &st, &m, 0), Err(DemandError::NegativeRate));
    }
}
