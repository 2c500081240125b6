//! Periodic relocation planning.
//!
//! Every interval `[kT, (k+1)T)` the planner
//! 1. estimates each station's vehicle balance
//!    `b = parked + expected drop-offs - expected pickups - reserve`,
//! 2. greedily pairs the richest feeders with the neediest recipients,
//!    never moving more than the train capacity per pair,
//! 3. assigns idle relocators to pairs, largest pairs first, choosing the
//!    relocator with the shortest approach-plus-delivery time.
//!
//! With self-driving vehicles the third step is skipped and vehicles move on
//! their own.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::domain::{Seconds, StationId, TravelTimeMatrix, TripRequest};

/// How many vehicles a station keeps regardless of the forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlPolicy {
    #[default]
    Zero,
    /// Keep one vehicle at stations whose uncontrolled balance is positive.
    ConservativeOne,
}

impl ControlPolicy {
    pub fn reserve(self, uncontrolled: i64) -> u32 {
        match self {
            ControlPolicy::Zero => 0,
            ControlPolicy::ConservativeOne => u32::from(uncontrolled > 0),
        }
    }
}

/// How many vehicles one relocator moves per trip for a given train size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMode {
    /// The relocator travels separately and moves up to `v_T` vehicles.
    #[default]
    Service,
    /// One vehicle of the train stays with the relocator, so `v_T - 1` move.
    TrainCar,
}

impl CapacityMode {
    pub fn effective(self, train_size: u32) -> u32 {
        match self {
            CapacityMode::Service => train_size,
            CapacityMode::TrainCar => train_size.saturating_sub(1),
        }
        .max(1)
    }
}

/// The decision window `[start, start + length)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Seconds,
    pub length: Seconds,
}

impl Window {
    /// Window number `k` of length `interval`.
    pub fn nth(k: u64, interval: Seconds) -> Self {
        Window { start: k * interval, length: interval }
    }

    pub fn end(&self) -> Seconds {
        self.start + self.length
    }

    #[inline]
    pub fn contains(&self, t: Seconds) -> bool {
        t >= self.start && t < self.end()
    }
}

/// Vehicles expected to reach a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrival {
    pub station: StationId,
    pub time: Seconds,
    pub vehicles: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceEntry {
    pub parked: u32,
    pub drop: u32,
    pub pick: u32,
    pub control: u32,
    pub balance: i64,
}

impl BalanceEntry {
    /// Evaluates the balance from its components.
    pub fn new(parked: u32, drop: u32, pick: u32, control: u32) -> Self {
        let balance = parked as i64 + drop as i64 - pick as i64 - control as i64;
        BalanceEntry { parked, drop, pick, control, balance }
    }

    pub fn with_policy(parked: u32, drop: u32, pick: u32, policy: ControlPolicy) -> Self {
        let uncontrolled = parked as i64 + drop as i64 - pick as i64;
        Self::new(parked, drop, pick, policy.reserve(uncontrolled))
    }

    pub fn is_consistent(&self) -> bool {
        self.balance
            == self.parked as i64 + self.drop as i64 - self.pick as i64 - self.control as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceSnapshot {
    pub window: Window,
    pub entries: Vec<BalanceEntry>,
}

impl BalanceSnapshot {
    pub fn balance(&self, s: StationId) -> i64 {
        self.entries[s.index()].balance
    }

    pub fn is_consistent(&self) -> bool {
        self.entries.iter().all(BalanceEntry::is_consistent)
    }
}

/// Expected balance of every station over `window`.
///
/// `arrivals` are vehicles already on the road (customers and relocations).
/// `forecast` holds trips that will be requested; each counts as a pickup at
/// its origin if requested in the window and as a drop-off at its
/// destination if it also completes in the window. `committed` are vehicles
/// already promised to relocators at each station, counted as pickups.
pub fn compute_balance(
    window: Window,
    parked: &[u32],
    arrivals: &[Arrival],
    forecast: &[TripRequest],
    committed: &[u32],
    policy: ControlPolicy,
) -> BalanceSnapshot {
    let n = parked.len();
    let mut drop = vec![0u32; n];
    let mut pick = committed.to_vec();
    pick.resize(n, 0);

    for a in arrivals {
        if window.contains(a.time) {
            drop[a.station.index()] += a.vehicles;
        }
    }
    for t in forecast {
        if window.contains(t.request_time) {
            pick[t.origin.index()] += 1;
            if window.contains(t.dropoff_time()) {
                drop[t.destination.index()] += 1;
            }
        }
    }

    let entries = (0..n)
        .map(|i| BalanceEntry::with_policy(parked[i], drop[i], pick[i], policy))
        .collect();
    BalanceSnapshot { window, entries }
}

/// A station with its excess (feeder) or deficit (recipient) magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub station: StationId,
    pub amount: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchingDiagnostics {
    pub v_excess: u64,
    pub v_deficit: u64,
    pub feasible: bool,
    /// Deficit left after matching. Before matching it is the lower bound
    /// `max(0, v_deficit - v_excess)`.
    pub unserved_deficit: u64,
}

impl MatchingDiagnostics {
    fn new(feeders: &[Party], recipients: &[Party]) -> Self {
        let v_excess: u64 = feeders.iter().map(|p| p.amount as u64).sum();
        let v_deficit: u64 = recipients.iter().map(|p| p.amount as u64).sum();
        MatchingDiagnostics {
            v_excess,
            v_deficit,
            feasible: v_excess >= v_deficit,
            unserved_deficit: v_deficit.saturating_sub(v_excess),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    /// Positive balances, largest first.
    pub feeders: Vec<Party>,
    /// Deficit magnitudes, largest first.
    pub recipients: Vec<Party>,
    pub diagnostics: MatchingDiagnostics,
}

fn by_amount_desc(a: &Party, b: &Party) -> Ordering {
    b.amount.cmp(&a.amount).then(a.station.cmp(&b.station))
}

/// Splits stations into feeders (`b > 0`) and recipients (`b < 0`).
pub fn classify_balances(balances: &[i64]) -> Classification {
    let mut feeders = Vec::new();
    let mut recipients = Vec::new();
    for (i, &b) in balances.iter().enumerate() {
        let station = StationId::from(i);
        match b.cmp(&0) {
            Ordering::Greater => feeders.push(Party { station, amount: b as u32 }),
            Ordering::Less => recipients.push(Party { station, amount: b.unsigned_abs() as u32 }),
            Ordering::Equal => {}
        }
    }
    feeders.sort_by(by_amount_desc);
    recipients.sort_by(by_amount_desc);
    let diagnostics = MatchingDiagnostics::new(&feeders, &recipients);
    Classification { feeders, recipients, diagnostics }
}

pub fn classify_stations(snapshot: &BalanceSnapshot) -> Classification {
    let balances: Vec<i64> = snapshot.entries.iter().map(|e| e.balance).collect();
    classify_balances(&balances)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeederRecipientPair {
    pub feeder: StationId,
    pub recipient: StationId,
    pub vehicles: u32,
}

/// Greedy feeder-recipient matching.
///
/// Each round takes the recipient with the largest remaining deficit (ties:
/// smaller id) and the feeder with the largest remaining excess (ties:
/// shorter travel time to that recipient, then smaller id), and pairs them
/// for `min(deficit, excess, cap)` vehicles. Exhausted parties leave. The
/// same two stations can be paired again in a later round. `cap = None`
/// means no per-pair limit.
pub fn match_feeders_recipients(
    feeders: &[Party],
    recipients: &[Party],
    cap: Option<u32>,
    times: &TravelTimeMatrix,
) -> (Vec<FeederRecipientPair>, MatchingDiagnostics) {
    let mut diagnostics = MatchingDiagnostics::new(feeders, recipients);
    let mut feeders: Vec<Party> = feeders.iter().copied().filter(|p| p.amount > 0).collect();
    let mut recipients: Vec<Party> = recipients.iter().copied().filter(|p| p.amount > 0).collect();
    let cap = cap.unwrap_or(u32::MAX).max(1);
    let mut pairs = Vec::new();

    while !feeders.is_empty() && !recipients.is_empty() {
        let ri = (0..recipients.len())
            .min_by(|&a, &b| by_amount_desc(&recipients[a], &recipients[b]))
            .expect("non-empty");
        let r = recipients[ri].station;
        let fi = (0..feeders.len())
            .min_by(|&a, &b| {
                let (fa, fb) = (&feeders[a], &feeders[b]);
                fb.amount
                    .cmp(&fa.amount)
                    .then(times.get(fa.station, r).cmp(&times.get(fb.station, r)))
                    .then(fa.station.cmp(&fb.station))
            })
            .expect("non-empty");

        let v = recipients[ri].amount.min(feeders[fi].amount).min(cap);
        pairs.push(FeederRecipientPair { feeder: feeders[fi].station, recipient: r, vehicles: v });
        feeders[fi].amount -= v;
        recipients[ri].amount -= v;
        if feeders[fi].amount == 0 {
            feeders.swap_remove(fi);
        }
        if recipients[ri].amount == 0 {
            recipients.swap_remove(ri);
        }
    }

    diagnostics.unserved_deficit = recipients.iter().map(|p| p.amount as u64).sum();
    (pairs, diagnostics)
}

pub type RelocatorId = u32;

/// An idle relocator waiting at a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleRelocator {
    pub id: RelocatorId,
    pub station: StationId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelocationTask {
    pub relocator: RelocatorId,
    pub origin: StationId,
    pub feeder: StationId,
    pub recipient: StationId,
    pub vehicles: u32,
    pub depart: Seconds,
    pub feeder_arrival: Seconds,
    pub recipient_arrival: Seconds,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelocatorMatching {
    pub tasks: Vec<RelocationTask>,
    /// Pairs left without a relocator, in their original order.
    pub backlog: Vec<FeederRecipientPair>,
}

/// Time for a relocator at `from` to reach `to`, given how it travels.
#[inline]
pub fn approach_time(times: &TravelTimeMatrix, from: StationId, to: StationId, factor: f64) -> Seconds {
    let t = times.get(from, to);
    if factor == 1.0 {
        t
    } else {
        (t as f64 * factor).round() as Seconds
    }
}

/// Greedy relocator assignment.
///
/// Repeatedly takes the pair moving the most vehicles (ties: shorter
/// feeder-to-recipient time, then feeder id, then recipient id, then list
/// order) and gives it to the idle relocator minimising approach time plus
/// delivery time (ties: smaller relocator id). Approach legs take
/// `approach_factor` times the driving time.
pub fn match_relocators(
    pairs: &[FeederRecipientPair],
    idle: &[IdleRelocator],
    times: &TravelTimeMatrix,
    now: Seconds,
    approach_factor: f64,
) -> RelocatorMatching {
    let mut open: Vec<(usize, FeederRecipientPair)> = pairs.iter().copied().enumerate().collect();
    let mut free: Vec<IdleRelocator> = idle.to_vec();
    let mut tasks = Vec::new();

    while !open.is_empty() && !free.is_empty() {
        let pi = (0..open.len())
            .min_by(|&a, &b| {
                let ((ia, pa), (ib, pb)) = (&open[a], &open[b]);
                pb.vehicles
                    .cmp(&pa.vehicles)
                    .then(times.get(pa.feeder, pa.recipient).cmp(&times.get(pb.feeder, pb.recipient)))
                    .then(pa.feeder.cmp(&pb.feeder))
                    .then(pa.recipient.cmp(&pb.recipient))
                    .then(ia.cmp(ib))
            })
            .expect("non-empty");
        let (_, p) = open.remove(pi);
        let delivery = times.get(p.feeder, p.recipient);

        let oi = (0..free.len())
            .min_by_key(|&k| {
                let o = free[k];
                (approach_time(times, o.station, p.feeder, approach_factor) + delivery, o.id)
            })
            .expect("non-empty");
        let o = free.swap_remove(oi);

        let feeder_arrival = now + approach_time(times, o.station, p.feeder, approach_factor);
        tasks.push(RelocationTask {
            relocator: o.id,
            origin: o.station,
            feeder: p.feeder,
            recipient: p.recipient,
            vehicles: p.vehicles,
            depart: now,
            feeder_arrival,
            recipient_arrival: feeder_arrival + delivery,
        });
    }

    open.sort_by_key(|&(i, _)| i);
    RelocatorMatching { tasks, backlog: open.into_iter().map(|(_, p)| p).collect() }
}

/// One self-driving vehicle moving from a feeder to a recipient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleMove {
    pub from: StationId,
    pub to: StationId,
    pub depart: Seconds,
    pub arrive: Seconds,
}

/// Expands each pair into individual vehicle moves departing at `now`.
pub fn autonomous_dispatch(
    pairs: &[FeederRecipientPair],
    times: &TravelTimeMatrix,
    now: Seconds,
) -> Vec<VehicleMove> {
    pairs
        .iter()
        .flat_map(|p| {
            let m = VehicleMove {
                from: p.feeder,
                to: p.recipient,
                depart: now,
                arrive: now + times.get(p.feeder, p.recipient),
            };
            std::iter::repeat_n(m, p.vehicles as usize)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: StationId = StationId(0);
    const B: StationId = StationId(1);
    const C: StationId = StationId(2);
    const D: StationId = StationId(3);

    fn party(s: StationId, amount: u32) -> Party {
        Party { station: s, amount }
    }

    fn pair(f: StationId, r: StationId, v: u32) -> FeederRecipientPair {
        FeederRecipientPair { feeder: f, recipient: r, vehicles: v }
    }

    #[test]
    fn balance_is_the_sum_of_its_parts() {
        assert_eq!(BalanceEntry::new(3, 2, 4, 1).balance, 0);
        assert_eq!(BalanceEntry::new(0, 0, 2, 0).balance, -2);
    }

    #[test]
    fn relocation_arrivals_count_as_dropoffs() {
        let w = Window::nth(2, 900);
        let arrivals = [Arrival { station: A, time: 1800 + 450, vehicles: 3 }];
        let trip = |id, t| TripRequest { id, origin: A, destination: B, request_time: t, travel_time: 5000 };
        let snap = compute_balance(
            w,
            &[1, 0],
            &arrivals,
            &[trip(0, 1900), trip(1, 2000), trip(2, 2700)],
            &[],
            ControlPolicy::ConservativeOne,
        );
        let e = snap.entries[0];
        assert_eq!((e.parked, e.drop, e.pick, e.control), (1, 3, 2, 1));
        assert_eq!(e.balance, 1);
        assert!(snap.is_consistent());
        // Trips finish after the window, so B sees no drop-offs.
        assert_eq!(snap.entries[1].balance, 0);
    }

    #[test]
    fn conservative_reserve_only_when_positive() {
        assert_eq!(BalanceEntry::with_policy(1, 0, 1, ControlPolicy::ConservativeOne).control, 0);
        assert_eq!(BalanceEntry::with_policy(2, 0, 1, ControlPolicy::ConservativeOne).control, 1);
        assert_eq!(BalanceEntry::with_policy(5, 0, 0, ControlPolicy::Zero).control, 0);
    }

    #[test]
    fn committed_vehicles_reduce_balance() {
        let snap = compute_balance(Window::nth(0, 60), &[4], &[], &[], &[3], ControlPolicy::Zero);
        assert_eq!(snap.entries[0].balance, 1);
    }

    #[test]
    fn classification() {
        let c = classify_balances(&[0, 0, 0]);
        assert!(c.feeders.is_empty() && c.recipients.is_empty());
        assert!(c.diagnostics.feasible);

        let c = classify_balances(&[3, -2, 0]);
        assert_eq!(c.feeders, vec![party(A, 3)]);
        assert_eq!(c.recipients, vec![party(B, 2)]);
        assert_eq!((c.diagnostics.v_excess, c.diagnostics.v_deficit), (3, 2));

        let c = classify_balances(&[1, -4]);
        assert!(!c.diagnostics.feasible);
        assert_eq!(c.diagnostics.unserved_deficit, 3);
    }

    #[test]
    fn classification_orders_by_magnitude_then_id() {
        let c = classify_balances(&[2, -1, 5, -3, 2, -3]);
        let f: Vec<u32> = c.feeders.iter().map(|p| p.station.0).collect();
        let r: Vec<u32> = c.recipients.iter().map(|p| p.station.0).collect();
        assert_eq!(f, vec![2, 0, 4]);
        assert_eq!(r, vec![3, 5, 1]);
    }

    #[test]
    fn single_pair_under_cap() {
        let t = TravelTimeMatrix::uniform(2, 60);
        let (p, d) = match_feeders_recipients(&[party(A, 3)], &[party(B, 2)], Some(7), &t);
        assert_eq!(p, vec![pair(A, B, 2)]);
        assert_eq!(d.unserved_deficit, 0);
    }

    #[test]
    fn perfect_match() {
        let t = TravelTimeMatrix::uniform(2, 60);
        let (p, _) = match_feeders_recipients(&[party(A, 2)], &[party(B, 2)], Some(2), &t);
        assert_eq!(p, vec![pair(A, B, 2)]);
    }

    #[test]
    fn capped_matching_revisits_pairs() {
        let mut t = TravelTimeMatrix::uniform(4, 500);
        t.set(A, C, 100);
        t.set(B, C, 200);
        let (p, d) = match_feeders_recipients(
            &[party(A, 5), party(B, 1)],
            &[party(C, 4), party(D, 3)],
            Some(2),
            &t,
        );
        assert_eq!(p, vec![pair(A, C, 2), pair(A, D, 2), pair(A, C, 1), pair(B, C, 1)]);
        assert_eq!(d.unserved_deficit, 1);
    }

    #[test]
    fn feeder_tie_prefers_nearer_feeder() {
        let mut t = TravelTimeMatrix::uniform(3, 500);
        t.set(B, C, 100);
        let (p, _) = match_feeders_recipients(&[party(A, 2), party(B, 2)], &[party(C, 1)], None, &t);
        assert_eq!(p, vec![pair(B, C, 1)]);
    }

    #[test]
    fn no_relocators_everything_backlogged() {
        let t = TravelTimeMatrix::uniform(2, 60);
        let m = match_relocators(&[pair(A, B, 2)], &[], &t, 0, 1.0);
        assert!(m.tasks.is_empty());
        assert_eq!(m.backlog, vec![pair(A, B, 2)]);
        assert_eq!(match_relocators(&[], &[IdleRelocator { id: 0, station: A }], &t, 0, 1.0), RelocatorMatching::default());
    }

    #[test]
    fn largest_pair_gets_closest_relocator() {
        let mut t = TravelTimeMatrix::uniform(4, 1000);
        t.set(A, C, 100);
        t.set(B, C, 900);
        let pairs = [pair(D, B, 3), pair(C, D, 5)];
        let idle = [IdleRelocator { id: 7, station: A }, IdleRelocator { id: 2, station: B }];
        let m = match_relocators(&pairs, &idle, &t, 50, 1.0);
        assert_eq!(m.tasks.len(), 2);
        assert_eq!((m.tasks[0].relocator, m.tasks[0].feeder), (7, C));
        assert_eq!(m.tasks[0].feeder_arrival, 150);
        assert_eq!(m.tasks[0].recipient_arrival, 1150);
        assert_eq!((m.tasks[1].relocator, m.tasks[1].feeder), (2, D));
        assert!(m.backlog.is_empty());
    }

    #[test]
    fn bike_approach_is_slower() {
        let t = TravelTimeMatrix::uniform(3, 100);
        let m = match_relocators(&[pair(B, C, 1)], &[IdleRelocator { id: 0, station: A }], &t, 0, 3.0);
        assert_eq!(m.tasks[0].feeder_arrival, 300);
        assert_eq!(m.tasks[0].recipient_arrival, 400);
    }

    #[test]
    fn autonomous_moves_one_per_vehicle() {
        let t = TravelTimeMatrix::uniform(2, 300);
        let moves = autonomous_dispatch(&[pair(A, B, 2)], &t, 1000);
        assert_eq!(moves.len(), 2);
        assert!(moves.iter().all(|m| m.to == B && m.arrive == 1300));
        assert!(autonomous_dispatch(&[], &t, 0).is_empty());
    }

    #[test]
    fn capacity_modes() {
        assert_eq!(CapacityMode::Service.effective(2), 2);
        assert_eq!(CapacityMode::TrainCar.effective(2), 1);
        assert_eq!(CapacityMode::TrainCar.effective(8), 7);
    }
}
