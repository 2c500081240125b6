//! Independent reference implementations used only by tests.

#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use relocsim::domain::{DemandTrace, Seconds, Station, StationId, TravelTimeMatrix, TripRequest};

/// Dense two-phase simplex with Bland's rule.
pub mod lp {
    const EPS: f64 = 1e-11;

    struct Tableau {
        rows: Vec<Vec<f64>>,
        basis: Vec<usize>,
        cols: usize,
    }

    impl Tableau {
        fn pivot(&mut self, r: usize, c: usize) {
            let p = self.rows[r][c];
            for v in self.rows[r].iter_mut() {
                *v /= p;
            }
            let pivot_row = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r {
                    let f = row[c];
                    if f != 0.0 {
                        for (v, pv) in row.iter_mut().zip(&pivot_row) {
                            *v -= f * pv;
                        }
                    }
                }
            }
            self.basis[r] = c;
        }

        fn objective(&self, cost: &[f64]) -> f64 {
            self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[self.cols]).sum()
        }

        /// Minimises `cost` over columns `< eligible`. `false` if unbounded.
        fn optimise(&mut self, cost: &[f64], eligible: usize) -> bool {
            loop {
                let entering = (0..eligible).find(|&j| {
                    let z: f64 = self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum();
                    cost[j] - z < -EPS
                });
                let Some(c) = entering else { return true };
                let mut best: Option<(f64, usize, usize)> = None;
                for (i, row) in self.rows.iter().enumerate() {
                    if row[c] > EPS {
                        let ratio = row[self.cols] / row[c];
                        let better = match best {
                            None => true,
                            Some((br, _, bb)) => ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < bb),
                        };
                        if better {
                            best = Some((ratio, i, self.basis[i]));
                        }
                    }
                }
                match best {
                    Some((_, r, _)) => self.pivot(r, c),
                    None => return false,
                }
            }
        }
    }

    /// Minimum of `c.x` subject to `A x = b`, `x >= 0`. `None` when
    /// infeasible or unbounded.
    pub fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
        let m = a.len();
        let n = c.len();
        let mut rows = Vec::with_capacity(m);
        for (i, (ai, &bi)) in a.iter().zip(b).enumerate() {
            let sign = if bi < 0.0 { -1.0 } else { 1.0 };
            let mut row: Vec<f64> = ai.iter().map(|v| v * sign).collect();
            row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            row.push(bi * sign);
            rows.push(row);
        }
        let mut t = Tableau { rows, basis: (n..n + m).collect(), cols: n + m };

        let mut phase1 = vec![0.0; n + m];
        phase1[n..].iter_mut().for_each(|v| *v = 1.0);
        t.optimise(&phase1, n + m);
        let scale = 1.0 + b.iter().map(|v| v.abs()).sum::<f64>();
        if t.objective(&phase1) > 1e-9 * scale {
            return None;
        }
        for r in 0..m {
            if t.basis[r] >= n {
                if let Some(c) = (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                    t.pivot(r, c);
                }
            }
        }

        let mut phase2 = c.to_vec();
        phase2.extend(std::iter::repeat_n(0.0, m));
        if !t.optimise(&phase2, n) {
            return None;
        }
        Some(t.objective(&phase2))
    }

    /// Rebalancing LP written directly from customer rates: for each
    /// station, customer arrivals plus empty arrivals equal customer
    /// departures plus empty departures. Minimises empty vehicle-hours.
    pub fn rebalancing_objective(n: usize, lambda: &[f64], hours: &[f64]) -> Option<f64> {
        let vars: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for s in 0..n {
            let row: Vec<f64> = vars
                .iter()
                .map(|&(i, j)| match (i == s, j == s) {
                    (true, _) => 1.0,
                    (_, true) => -1.0,
                    _ => 0.0,
                })
                .collect();
            let cust_in: f64 = (0..n).filter(|&k| k != s).map(|k| lambda[k * n + s]).sum();
            let cust_out: f64 = (0..n).filter(|&k| k != s).map(|k| lambda[s * n + k]).sum();
            a.push(row);
            b.push(cust_in - cust_out);
        }
        let c: Vec<f64> = vars.iter().map(|&(i, j)| hours[i * n + j]).collect();
        minimize(&a, &b, &c)
    }
}

/// Step-by-step transcription of the greedy feeder-recipient matching with
/// its three comparison branches and explicit re-sorting.
pub mod greedy_oracle {

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Pair {
        pub feeder: u32,
        pub recipient: u32,
        pub vehicles: u32,
    }

    /// `balances[i]` is station i's balance; `times[f][r]` breaks feeder ties.
    pub fn run(balances: &[i64], v_t: u32, times: &[Vec<u64>]) -> (Vec<Pair>, u64) {
        // (station, magnitude)
        let mut feeders: Vec<(u32, i64)> =
            balances.iter().enumerate().filter(|(_, &b)| b > 0).map(|(i, &b)| (i as u32, b)).collect();
        let mut recipients: Vec<(u32, i64)> =
            balances.iter().enumerate().filter(|(_, &b)| b < 0).map(|(i, &b)| (i as u32, -b)).collect();
        let v_t = v_t as i64;
        let sort_r = |r: &mut Vec<(u32, i64)>| r.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let sort_f = |f: &mut Vec<(u32, i64)>, r: u32| {
            f.sort_by(|a, b| {
                b.1.cmp(&a.1)
                    .then(times[a.0 as usize][r as usize].cmp(&times[b.0 as usize][r as usize]))
                    .then(a.0.cmp(&b.0))
            })
        };
        sort_r(&mut recipients);
        let mut out = Vec::new();

        while !recipients.is_empty() && !feeders.is_empty() {
            let (r, d) = recipients[0];
            sort_f(&mut feeders, r);
            let (f, e) = feeders[0];
            if d < e {
                let v = d.min(v_t);
                out.push(Pair { feeder: f, recipient: r, vehicles: v as u32 });
                feeders[0].1 -= v;
                recipients[0].1 -= v;
                if recipients[0].1 == 0 {
                    recipients.remove(0);
                } else {
                    sort_r(&mut recipients);
                }
            } else if d == e {
                let v = d.min(v_t);
                out.push(Pair { feeder: f, recipient: r, vehicles: v as u32 });
                feeders[0].1 -= v;
                recipients[0].1 -= v;
                if recipients[0].1 == 0 {
                    recipients.remove(0);
                    feeders.remove(0);
                } else {
                    sort_r(&mut recipients);
                }
            } else {
                let v = e.min(v_t);
                out.push(Pair { feeder: f, recipient: r, vehicles: v as u32 });
                feeders[0].1 -= v;
                recipients[0].1 -= v;
                sort_r(&mut recipients);
                if feeders[0].1 == 0 {
                    feeders.remove(0);
                }
            }
        }
        let unserved = recipients.iter().map(|&(_, d)| d as u64).sum();
        (out, unserved)
    }
}

/// Largest volume any transport plan can move from `excess` to `deficit`,
/// found by enumerating every integer plan.
pub fn max_transport_volume(excess: &[u32], deficit: &[u32]) -> u32 {
    fn go(cells: &[(usize, usize)], k: usize, ex: &mut [u32], de: &mut [u32], moved: u32, best: &mut u32) {
        if k == cells.len() {
            *best = (*best).max(moved);
            return;
        }
        let (f, r) = cells[k];
        for v in 0..=ex[f].min(de[r]) {
            ex[f] -= v;
            de[r] -= v;
            go(cells, k + 1, ex, de, moved + v, best);
            ex[f] += v;
            de[r] += v;
        }
    }
    let cells: Vec<(usize, usize)> =
        (0..excess.len()).flat_map(|f| (0..deficit.len()).map(move |r| (f, r))).collect();
    let mut best = 0;
    go(&cells, 0, &mut excess.to_vec(), &mut deficit.to_vec(), 0, &mut best);
    best
}

/// Deterministic uniform integers for scenario construction in tests.
pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.0.next_u64() % (hi - lo + 1)
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random trace on `n` stations with `trips` requests over one day and a
/// random symmetric-free travel-time matrix.
pub fn random_trace(rng: &mut TestRng, n: usize, trips: usize) -> DemandTrace {
    let stations: Vec<Station> = (0..n).map(|i| Station::new(i, i as f64 * 1000.0, 0.0)).collect();
    let mut times = TravelTimeMatrix::uniform(n, 0);
    for i in 0..n {
        for j in 0..n {
            times.set(StationId::from(i), StationId::from(j), rng.range(60, 3600));
        }
    }
    let horizon: Seconds = 86_400;
    let reqs = (0..trips)
        .map(|k| {
            let o = rng.range(0, n as u64 - 1) as u32;
            let mut d = rng.range(0, n as u64 - 2) as u32;
            if d >= o {
                d += 1;
            }
            TripRequest {
                id: k as u64,
                origin: StationId(o),
                destination: StationId(d),
                request_time: rng.range(0, horizon - 1),
                travel_time: times.get(StationId(o), StationId(d)),
            }
        })
        .collect();
    DemandTrace::new(stations, times, reqs, horizon)
}
