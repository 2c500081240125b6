//! Analytical fleet sizing.
//!
//! Two bounds frame the simulation results: the fleet needed to serve every
//! request without any relocation, and the fluid-model fleet under optimal
//! steady-state rebalancing, computed as an uncapacitated min-cost flow.

use std::collections::BinaryHeap;
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::domain::{DemandTrace, Seconds, StationId, TravelTimeMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FleetError {
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("rate matrix has {got} entries, expected {expected}")]
    RateShape { got: usize, expected: usize },
    #[error("rate from {from} to {to} is {rate}, expected a finite non-negative value")]
    BadRate { from: usize, to: usize, rate: f64 },
    #[error("rate matrix covers {rates} stations, travel times cover {times}")]
    SizeMismatch { rates: usize, times: usize },
    #[error("station supplies do not balance (residual {0})")]
    Unbalanced(f64),
    #[error("min-cost flow did not converge within {0} augmentations")]
    NoConvergence(usize),
    #[error("optimality certificate failed: {0}")]
    Certificate(String),
}

/// Customer trip rates in trips per hour. Diagonal is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    n: usize,
    rates: Vec<f64>,
    /// Length of the window the rates were estimated over.
    pub window: Seconds,
}

impl RateMatrix {
    pub fn new(n: usize, rates: Vec<f64>, window: Seconds) -> Result<Self, FleetError> {
        if rates.len() != n * n {
            return Err(FleetError::RateShape { got: rates.len(), expected: n * n });
        }
        let mut rates = rates;
        for i in 0..n {
            for j in 0..n {
                let r = rates[i * n + j];
                if !(r.is_finite() && r >= 0.0) {
                    return Err(FleetError::BadRate { from: i, to: j, rate: r });
                }
            }
            rates[i * n + i] = 0.0;
        }
        Ok(RateMatrix { n, rates, window })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn scaled(&self, c: f64) -> Self {
        RateMatrix {
            n: self.n,
            rates: self.rates.iter().map(|r| r * c).collect(),
            window: self.window,
        }
    }

    /// Net rebalancing outflow each station needs: customer inflow minus
    /// customer outflow.
    pub fn surplus(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.get(j, i) - self.get(i, j)).sum())
            .collect()
    }
}

/// Trips per hour for every OD pair, averaged over the horizon. Round trips
/// are not part of the rate matrix.
pub fn estimate_rates(trace: &DemandTrace) -> Result<RateMatrix, FleetError> {
    if trace.horizon == 0 {
        return Err(FleetError::ZeroHorizon);
    }
    let n = trace.station_count();
    let hours = trace.horizon as f64 / 3600.0;
    let mut counts = vec![0u64; n * n];
    for t in &trace.trips {
        if !t.is_round_trip() {
            counts[t.origin.index() * n + t.destination.index()] += 1;
        }
    }
    RateMatrix::new(n, counts.into_iter().map(|c| c as f64 / hours).collect(), trace.horizon)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoRelocationSizing {
    /// Vehicles to park at each station at time zero.
    pub initial: Vec<u64>,
    pub total: u64,
    /// Trace index of the first pickup at which each station's requirement
    /// peaks; `None` when the station never needs a vehicle.
    pub witness: Vec<Option<usize>>,
}

/// Smallest initial placement that serves every request without relocation.
///
/// Replays the trace in simulator order: a drop-off completing at `t` is
/// visible to every pickup requested at `t` or later that comes after the
/// originating trip in the trace.
pub fn min_fleet_no_relocation(trace: &DemandTrace) -> NoRelocationSizing {
    let n = trace.station_count();
    let mut balance = vec![0i64; n];
    let mut peak = vec![0i64; n];
    let mut witness = vec![None; n];
    let mut pending: BinaryHeap<Reverse<(Seconds, usize)>> = BinaryHeap::new();

    for (k, trip) in trace.trips.iter().enumerate() {
        while let Some(&Reverse((t, j))) = pending.peek() {
            if t > trip.request_time {
                break;
            }
            pending.pop();
            balance[trace.trips[j].destination.index()] -= 1;
        }
        let o = trip.origin.index();
        balance[o] += 1;
        if balance[o] > peak[o] {
            peak[o] = balance[o];
            witness[o] = Some(k);
        }
        pending.push(Reverse((trip.dropoff_time(), k)));
    }

    let initial: Vec<u64> = peak.into_iter().map(|p| p.max(0) as u64).collect();
    NoRelocationSizing { total: initial.iter().sum(), initial, witness }
}

/// Optimal steady-state rebalancing flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidSolution {
    pub n: usize,
    /// Row-major rebalancing flow in vehicles per hour.
    pub flows: Vec<f64>,
    /// Vehicle-hours per hour spent driving empty.
    pub objective: f64,
    /// Fleet lower bound: vehicles busy with customers plus rebalancing.
    pub min_fleet: f64,
    pub inbound: Vec<f64>,
    pub outbound: Vec<f64>,
    /// Node potentials proving optimality.
    pub potentials: Vec<f64>,
}

impl FluidSolution {
    #[inline]
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flows[i * self.n + j]
    }

    /// Fleet to provision: `min_fleet` rounded up.
    pub fn min_fleet_ceil(&self) -> u64 {
        // Avoid 2.0000000000000004 rounding up to 3.
        (self.min_fleet - 1e-9).ceil().max(0.0) as u64
    }
}

fn hours(t: Seconds) -> f64 {
    t as f64 / 3600.0
}

/// Minimum-cost rebalancing flow for the given customer rates.
///
/// Successive shortest paths with Dijkstra over reduced costs on the
/// complete residual graph. Arc costs are travel times in hours.
pub fn solve_fluid(rates: &RateMatrix, times: &TravelTimeMatrix) -> Result<FluidSolution, FleetError> {
    let n = rates.len();
    if times.len() != n {
        return Err(FleetError::SizeMismatch { rates: n, times: times.len() });
    }
    let cost = |i: usize, j: usize| hours(times.get(StationId::from(i), StationId::from(j)));

    let mut supply = rates.surplus();
    let scale = supply.iter().map(|s| s.abs()).sum::<f64>().max(1.0);
    let residual: f64 = supply.iter().sum();
    if residual.abs() > 1e-9 * scale {
        return Err(FleetError::Unbalanced(residual));
    }
    let eps = 1e-12 * scale;

    let mut flows = vec![0.0; n * n];
    let mut pot = vec![0.0; n];
    let max_iter = 4 * n * n + 16;
    let mut iter = 0;

    while supply.iter().any(|&s| s > eps) {
        iter += 1;
        if iter > max_iter {
            return Err(FleetError::NoConvergence(max_iter));
        }

        // Multi-source Dijkstra, dense O(n^2).
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut done = vec![false; n];
        for i in 0..n {
            if supply[i] > eps {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            for i in 0..n {
                if !done[i] && dist[i].is_finite() && (u == usize::MAX || dist[i] < dist[u]) {
                    u = i;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for v in 0..n {
                if v == u || done[v] {
                    continue;
                }
                let mut arc = cost(u, v);
                if flows[v * n + u] > eps {
                    arc = arc.min(-cost(v, u));
                }
                let reduced = (arc + pot[u] - pot[v]).max(0.0);
                let cand = dist[u] + reduced;
                if cand < dist[v] {
                    dist[v] = cand;
                    prev[v] = u;
                }
            }
        }

        let sink = (0..n)
            .filter(|&i| supply[i] < -eps)
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
            .ok_or(FleetError::Unbalanced(supply.iter().sum()))?;

        // Walk the path back to its source and find the bottleneck.
        let mut amount = -supply[sink];
        let mut path = Vec::new();
        let mut v = sink;
        while prev[v] != usize::MAX {
            let u = prev[v];
            let backward = flows[v * n + u] > eps && -cost(v, u) < cost(u, v);
            if backward {
                amount = amount.min(flows[v * n + u]);
            }
            path.push((u, v, backward));
            v = u;
        }
        amount = amount.min(supply[v]);

        for &(u, w, backward) in &path {
            if backward {
                let f = &mut flows[w * n + u];
                *f -= amount;
                if *f < eps {
                    *f = 0.0;
                }
            } else {
                flows[u * n + w] += amount;
            }
        }
        supply[v] -= amount;
        supply[sink] += amount;
        for i in 0..n {
            if dist[i].is_finite() {
                pot[i] += dist[i];
            }
        }
    }

    let mut objective = 0.0;
    let mut min_fleet = 0.0;
    let mut inbound = vec![0.0; n];
    let mut outbound = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = flows[i * n + j];
            objective += a * cost(i, j);
            min_fleet += (rates.get(i, j) + a) * cost(i, j);
            outbound[i] += a;
            inbound[j] += a;
        }
    }

    let sol = FluidSolution { n, flows, objective, min_fleet, inbound, outbound, potentials: pot };
    check_certificate(&sol, rates, times)?;
    Ok(sol)
}

/// Verifies non-negativity, flow conservation and complementary slackness
/// of `sol` against its potentials.
pub fn check_certificate(
    sol: &FluidSolution,
    rates: &RateMatrix,
    times: &TravelTimeMatrix,
) -> Result<(), FleetError> {
    let n = sol.n;
    let surplus = rates.surplus();
    let scale = surplus.iter().map(|s| s.abs()).sum::<f64>().max(1.0);
    let max_cost = times.rows().flatten().copied().max().unwrap_or(0) as f64 / 3600.0;
    let tol = 1e-9 * (1.0 + max_cost);
    let flow_tol = 1e-9 * scale;

    for i in 0..n {
        let net = sol.outbound[i] - sol.inbound[i];
        if (net - surplus[i]).abs() > flow_tol {
            return Err(FleetError::Certificate(format!(
                "station {i}: net rebalancing {net} but surplus {}",
                surplus[i]
            )));
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = sol.flow(i, j);
            if a < 0.0 {
                return Err(FleetError::Certificate(format!("negative flow {i}->{j}")));
            }
            let c = hours(times.get(StationId::from(i), StationId::from(j)));
            let reduced = c + sol.potentials[i] - sol.potentials[j];
            if reduced < -tol {
                return Err(FleetError::Certificate(format!(
                    "arc {i}->{j} has negative reduced cost {reduced}"
                )));
            }
            if a > flow_tol && reduced > tol {
                return Err(FleetError::Certificate(format!(
                    "arc {i}->{j} carries flow with reduced cost {reduced}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Station, TripRequest};

    fn trace(trips: &[(u32, u32, Seconds, Seconds)], n: usize, horizon: Seconds) -> DemandTrace {
        let stations = (0..n).map(|i| Station::new(i, i as f64 * 1000.0, 0.0)).collect();
        let trips = trips
            .iter()
            .enumerate()
            .map(|(k, &(o, d, t, tt))| TripRequest {
                id: k as u64,
                origin: StationId(o),
                destination: StationId(d),
                request_time: t,
                travel_time: tt,
            })
            .collect();
        DemandTrace::new(stations, TravelTimeMatrix::uniform(n, 100), trips, horizon)
    }

    #[test]
    fn empty_trace_has_zero_rates() {
        let r = estimate_rates(&trace(&[], 3, 24 * 3600)).unwrap();
        assert!(r.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rates_are_trips_per_hour() {
        let trips: Vec<_> = (0..24).map(|h| (0, 1, h * 3600, 100)).collect();
        let r = estimate_rates(&trace(&trips, 2, 24 * 3600)).unwrap();
        assert_eq!(r.get(0, 1), 1.0);
        assert_eq!(r.get(1, 0), 0.0);
    }

    #[test]
    fn zero_horizon_is_an_error() {
        assert_eq!(estimate_rates(&trace(&[], 2, 0)), Err(FleetError::ZeroHorizon));
    }

    #[test]
    fn single_trip_needs_one_car() {
        let s = min_fleet_no_relocation(&trace(&[(0, 1, 0, 100)], 2, 3600));
        assert_eq!(s.initial, vec![1, 0]);
        assert_eq!(s.total, 1);
        assert_eq!(s.witness, vec![Some(0), None]);
    }

    #[test]
    fn returning_car_serves_later_trip() {
        let s = min_fleet_no_relocation(&trace(&[(0, 1, 0, 50), (1, 0, 100, 50)], 2, 3600));
        assert_eq!(s.initial, vec![1, 0]);
    }

    #[test]
    fn late_car_does_not_serve() {
        let s = min_fleet_no_relocation(&trace(&[(0, 1, 0, 200), (1, 0, 100, 50)], 2, 3600));
        assert_eq!(s.initial, vec![1, 1]);
    }

    #[test]
    fn dropoff_at_same_second_is_usable() {
        let s = min_fleet_no_relocation(&trace(&[(0, 1, 0, 100), (1, 0, 100, 50)], 2, 3600));
        assert_eq!(s.initial, vec![1, 0]);
    }

    #[test]
    fn zero_length_round_trip_still_needs_a_car() {
        let s = min_fleet_no_relocation(&trace(&[(0, 0, 10, 0), (0, 1, 10, 60)], 2, 3600));
        // The round trip's car is back before the second request is handled.
        assert_eq!(s.initial, vec![1, 0]);
    }

    #[test]
    fn two_station_fluid_instance() {
        let rates = RateMatrix::new(2, vec![0.0, 4.0, 1.0, 0.0], 3600).unwrap();
        let times = TravelTimeMatrix::uniform(2, 900);
        let sol = solve_fluid(&rates, &times).unwrap();
        assert!((sol.flow(1, 0) - 3.0).abs() < 1e-9);
        assert_eq!(sol.flow(0, 1), 0.0);
        assert!((sol.objective - 0.75).abs() < 1e-9);
        assert!((sol.min_fleet - 2.0).abs() < 1e-9);
        assert_eq!(sol.min_fleet_ceil(), 2);
        assert_eq!(sol.inbound, vec![3.0, 0.0]);
        assert_eq!(sol.outbound, vec![0.0, 3.0]);
    }

    #[test]
    fn symmetric_rates_need_no_rebalancing() {
        let rates = RateMatrix::new(3, vec![0.0, 2.0, 1.0, 2.0, 0.0, 5.0, 1.0, 5.0, 0.0], 3600).unwrap();
        let times = TravelTimeMatrix::from_rows(vec![vec![0, 600, 1200], vec![600, 0, 300], vec![1200, 300, 0]]).unwrap();
        let sol = solve_fluid(&rates, &times).unwrap();
        assert!(sol.flows.iter().all(|&a| a == 0.0));
        let expected = 2.0 * (2.0 * 600.0 + 1.0 * 1200.0 + 5.0 * 300.0) / 3600.0;
        assert!((sol.min_fleet - expected).abs() < 1e-12);
    }

    #[test]
    fn flow_routes_through_cheaper_intermediate() {
        // 0 -> 2 demand; direct return 2 -> 0 is slow, 2 -> 1 -> 0 is fast.
        let mut r = vec![0.0; 9];
        r[2] = 6.0;
        let rates = RateMatrix::new(3, r, 3600).unwrap();
        let times = TravelTimeMatrix::from_rows(vec![
            vec![0, 100, 100],
            vec![100, 0, 100],
            vec![1000, 100, 0],
        ])
        .unwrap();
        let sol = solve_fluid(&rates, &times).unwrap();
        assert!((sol.flow(2, 1) - 6.0).abs() < 1e-12);
        assert!((sol.flow(1, 0) - 6.0).abs() < 1e-12);
        assert_eq!(sol.flow(2, 0), 0.0);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(
            RateMatrix::new(2, vec![0.0, -1.0, 0.0, 0.0], 1),
            Err(FleetError::BadRate { from: 0, to: 1, .. })
        ));
        assert!(matches!(RateMatrix::new(2, vec![0.0; 3], 1), Err(FleetError::RateShape { .. })));
        let rates = RateMatrix::new(2, vec![0.0; 4], 1).unwrap();
        assert!(matches!(
            solve_fluid(&rates, &TravelTimeMatrix::uniform(3, 1)),
            Err(FleetError::SizeMismatch { rates: 2, times: 3 })
        ));
    }

    #[test]
    fn certificate_rejects_suboptimal_flow() {
        let rates = RateMatrix::new(2, vec![0.0, 4.0, 1.0, 0.0], 3600).unwrap();
        let times = TravelTimeMatrix::uniform(2, 900);
        let mut sol = solve_fluid(&rates, &times).unwrap();
        // Add a useless cycle.
        sol.flows[1] += 1.0;
        sol.flows[2] += 1.0;
        sol.outbound = vec![1.0, 4.0];
        sol.inbound = vec![4.0, 1.0];
        sol.potentials = vec![0.0, 0.0];
        assert!(matches!(check_certificate(&sol, &rates, &times), Err(FleetError::Certificate(_))));
    }
}
