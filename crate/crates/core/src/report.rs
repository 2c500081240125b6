//! Sweep result tables and plot-ready figure data.
//!
//! A sweep is persisted as three long-format CSV tables:
//!
//! * `runs.csv`: one row per simulation
//! * `busy.csv`: `run,minute,busy_relocators`
//! * `train_lengths.csv`: `run,train_length,tasks`
//!
//! [`build_figures`] turns them back into per-figure CSV and JSON files.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::fleet::FluidSolution;
use crate::sweep::SweepResult;

pub const RUNS_FILE: &str = "runs.csv";
pub const BUSY_FILE: &str = "busy.csv";
pub const TRAINS_FILE: &str = "train_lengths.csv";

pub const RUNS_HEADER: [&str; 15] = [
    "run",
    "strategy",
    "T_s",
    "v_T",
    "relocators",
    "accepted",
    "rejected",
    "acceptance",
    "relocated_vehicles",
    "relocation_tasks",
    "aborted_tasks",
    "shortfall_vehicles",
    "relocator_busy_s",
    "mean_train_length",
    "workers_per_unit",
];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: &'static str, column: &'static str },
    #[error("{file} line {line}: bad value `{value}` in column `{column}`")]
    BadValue { file: &'static str, line: u64, column: &'static str, value: String },
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

/// The three sweep tables as CSV text, in `(runs, busy, trains)` order.
pub fn sweep_tables(result: &SweepResult) -> Result<(String, String, String), ReportError> {
    let mut runs = csv::Writer::from_writer(Vec::new());
    let mut busy = csv::Writer::from_writer(Vec::new());
    let mut trains = csv::Writer::from_writer(Vec::new());
    runs.write_record(RUNS_HEADER)?;
    busy.write_record(["run", "minute", "busy_relocators"])?;
    trains.write_record(["run", "train_length", "tasks"])?;

    for (run, row) in result.rows.iter().enumerate() {
        let m = &row.metrics;
        let c = row.cell;
        runs.write_record([
            run.to_string(),
            c.strategy.name().to_string(),
            c.interval.to_string(),
            c.train_size.to_string(),
            c.relocators.to_string(),
            m.accepted.to_string(),
            m.rejected.to_string(),
            m.acceptance.to_string(),
            m.relocated_vehicles.to_string(),
            m.relocation_tasks.to_string(),
            m.aborted_tasks.to_string(),
            m.shortfall_vehicles.to_string(),
            m.relocator_busy_time.to_string(),
            m.mean_train_length().map_or(String::new(), |v| v.to_string()),
            m.workers_per_unit.to_string(),
        ])?;
        if m.relocator_units > 0 {
            for (minute, b) in m.busy_series().iter().enumerate() {
                busy.write_record([run.to_string(), minute.to_string(), b.to_string()])?;
            }
        }
        for (len, &count) in m.train_lengths.iter().enumerate() {
            if count > 0 {
                trains.write_record([run.to_string(), len.to_string(), count.to_string()])?;
            }
        }
    }
    let text = |w: csv::Writer<Vec<u8>>| -> Result<String, ReportError> {
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    };
    Ok((text(runs)?, text(busy)?, text(trains)?))
}

struct Table {
    file: &'static str,
    header: csv::StringRecord,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn parse(file: &'static str, text: &str, required: &[&'static str]) -> Result<Self, ReportError> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rd.headers()?.clone();
        for &col in required {
            if !header.iter().any(|h| h == col) {
                return Err(ReportError::MissingColumn { file, column: col });
            }
        }
        let rows = rd.records().collect::<Result<Vec<_>, _>>()?;
        Ok(Table { file, header, rows })
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).expect("checked in parse")
    }

    fn get<T: std::str::FromStr>(&self, row: &csv::StringRecord, column: &'static str) -> Result<T, ReportError> {
        let v = row.get(self.col(column)).unwrap_or("");
        v.parse().map_err(|_| ReportError::BadValue {
            file: self.file,
            line: row.position().map_or(0, |p| p.line()),
            column,
            value: v.to_string(),
        })
    }

    fn text<'r>(&self, row: &'r csv::StringRecord, column: &str) -> &'r str {
        row.get(self.col(column)).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq)]
struct RunKey {
    strategy: String,
    interval: u64,
    train_size: u32,
    relocators: u32,
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn pair(name: &str, csv: String, json: Value) -> [FigureFile; 2] {
    [
        FigureFile { name: format!("{name}.csv"), contents: csv },
        FigureFile { name: format!("{name}.json"), contents: json_text(&json) },
    ]
}

/// Acceptance, busy-relocator and train-length figures from sweep tables.
pub fn build_figures(runs: &str, busy: &str, trains: &str) -> Result<Vec<FigureFile>, ReportError> {
    let runs = Table::parse(RUNS_FILE, runs, &["run", "strategy", "T_s", "v_T", "relocators", "acceptance"])?;
    let busy = Table::parse(BUSY_FILE, busy, &["run", "minute", "busy_relocators"])?;
    let trains = Table::parse(TRAINS_FILE, trains, &["run", "train_length", "tasks"])?;

    let mut keys: BTreeMap<u64, RunKey> = BTreeMap::new();
    let mut acceptance_rows = Vec::new();
    // (strategy, T, v_T) -> [(relocators, acceptance)]
    let mut curves: BTreeMap<(String, u64, u32), Vec<(u32, f64)>> = BTreeMap::new();
    for r in &runs.rows {
        let run: u64 = runs.get(r, "run")?;
        let key = RunKey {
            strategy: runs.text(r, "strategy").to_string(),
            interval: runs.get(r, "T_s")?,
            train_size: runs.get(r, "v_T")?,
            relocators: runs.get(r, "relocators")?,
        };
        let acc: f64 = runs.get(r, "acceptance")?;
        acceptance_rows.push(vec![
            key.strategy.clone(),
            key.interval.to_string(),
            key.train_size.to_string(),
            key.relocators.to_string(),
            acc.to_string(),
        ]);
        curves
            .entry((key.strategy.clone(), key.interval, key.train_size))
            .or_default()
            .push((key.relocators, acc));
        keys.insert(run, key);
    }

    let key_of = |table: &Table, r: &csv::StringRecord| -> Result<Option<&RunKey>, ReportError> {
        let run: u64 = table.get(r, "run")?;
        Ok(keys.get(&run))
    };
    let key_cols = |k: &RunKey| {
        vec![k.strategy.clone(), k.interval.to_string(), k.train_size.to_string(), k.relocators.to_string()]
    };

    let mut busy_rows = Vec::new();
    let mut busy_series: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for r in &busy.rows {
        let Some(k) = key_of(&busy, r)? else { continue };
        let run: u64 = busy.get(r, "run")?;
        let minute: u64 = busy.get(r, "minute")?;
        let b: f64 = busy.get(r, "busy_relocators")?;
        let mut row = vec![run.to_string()];
        row.extend(key_cols(k));
        row.extend([minute.to_string(), b.to_string()]);
        busy_rows.push(row);
        busy_series.entry(run).or_default().push((minute, b));
    }

    let mut train_totals: BTreeMap<u64, u64> = BTreeMap::new();
    for r in &trains.rows {
        let run: u64 = trains.get(r, "run")?;
        *train_totals.entry(run).or_default() += trains.get::<u64>(r, "tasks")?;
    }
    let mut train_rows = Vec::new();
    let mut train_dists: BTreeMap<u64, Vec<(u32, u64, f64)>> = BTreeMap::new();
    for r in &trains.rows {
        let Some(k) = key_of(&trains, r)? else { continue };
        let run: u64 = trains.get(r, "run")?;
        let len: u32 = trains.get(r, "train_length")?;
        let tasks: u64 = trains.get(r, "tasks")?;
        let share = tasks as f64 / train_totals[&run] as f64;
        let mut row = key_cols(k);
        row.extend([len.to_string(), tasks.to_string(), share.to_string()]);
        train_rows.push(row);
        train_dists.entry(run).or_default().push((len, tasks, share));
    }

    let series_json = |run: &u64, extra: Value| {
        let k = &keys[run];
        let mut v = json!({
            "run": run,
            "strategy": k.strategy,
            "T_s": k.interval,
            "v_T": k.train_size,
            "relocators": k.relocators,
        });
        if let (Value::Object(dst), Value::Object(src)) = (&mut v, extra) {
            dst.extend(src);
        }
        v
    };

    let mut out = Vec::new();
    out.extend(pair(
        "acceptance_curves",
        csv_text(&["strategy", "T_s", "v_T", "relocators", "acceptance"], acceptance_rows)?,
        json!({
            "figure": "accepted pickups vs relocators",
            "series": curves.into_iter().map(|((s, t, v), mut pts)| {
                pts.sort_by_key(|p| p.0);
                json!({ "strategy": s, "T_s": t, "v_T": v, "points": pts })
            }).collect::<Vec<_>>(),
        }),
    ));
    out.extend(pair(
        "busy_relocators",
        csv_text(&["run", "strategy", "T_s", "v_T", "relocators", "minute", "busy_relocators"], busy_rows)?,
        json!({
            "figure": "busy relocators over time",
            "series": busy_series.iter().map(|(run, pts)| series_json(run, json!({ "points": pts }))).collect::<Vec<_>>(),
        }),
    ));
    out.extend(pair(
        "train_length_distribution",
        csv_text(&["strategy", "T_s", "v_T", "relocators", "train_length", "tasks", "share"], train_rows)?,
        json!({
            "figure": "train length distribution",
            "series": train_dists.iter().map(|(run, d)| series_json(run, json!({ "distribution": d }))).collect::<Vec<_>>(),
        }),
    ));
    Ok(out)
}

/// Per-station inflow minus outflow.
pub fn unbalance_figure(unbalance: &[i64]) -> Result<Vec<FigureFile>, ReportError> {
    let rows = unbalance.iter().enumerate().map(|(i, u)| vec![i.to_string(), u.to_string()]);
    Ok(pair(
        "station_unbalance",
        csv_text(&["station", "unbalance"], rows)?,
        json!({ "figure": "daily unbalance at stations", "unbalance": unbalance }),
    )
    .into())
}

/// Per-station inbound and outbound optimal rebalancing flows.
pub fn fluid_figure(sol: &FluidSolution) -> Result<Vec<FigureFile>, ReportError> {
    let rows = (0..sol.n).map(|i| vec![i.to_string(), sol.inbound[i].to_string(), sol.outbound[i].to_string()]);
    Ok(pair(
        "fluid_flows",
        csv_text(&["station", "inbound_veh_per_h", "outbound_veh_per_h"], rows)?,
        json!({
            "figure": "optimal rebalancing flows",
            "inbound": sol.inbound,
            "outbound": sol.outbound,
            "min_fleet": sol.min_fleet,
        }),
    )
    .into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_give_header_only_files() {
        let (runs, busy, trains) = sweep_tables(&SweepResult::default()).unwrap();
        let figs = build_figures(&runs, &busy, &trains).unwrap();
        assert_eq!(figs.len(), 6);
        let acc = figs.iter().find(|f| f.name == "acceptance_curves.csv").unwrap();
        assert_eq!(acc.contents, "strategy,T_s,v_T,relocators,acceptance\n");
        let json = figs.iter().find(|f| f.name == "acceptance_curves.json").unwrap();
        assert!(json.contents.contains("\"series\": []"));
    }

    #[test]
    fn missing_column_is_named() {
        let err = build_figures("run,strategy,T_s,v_T,relocators\n", "run,minute,busy_relocators\n", "run,train_length,tasks\n")
            .unwrap_err();
        assert!(matches!(err, ReportError::MissingColumn { file: RUNS_FILE, column: "acceptance" }));
        assert_eq!(err.to_string(), "runs.csv: missing column `acceptance`");
    }

    #[test]
    fn single_run_is_one_point_curve() {
        let runs = "run,strategy,T_s,v_T,relocators,acceptance\n0,stackable,900,8,30,0.75\n";
        let busy = "run,minute,busy_relocators\n0,0,1.5\n0,1,2\n";
        let trains = "run,train_length,tasks\n0,2,3\n0,5,1\n";
        let figs = build_figures(runs, busy, trains).unwrap();
        let acc: Value = serde_json::from_str(&figs[1].contents).unwrap();
        assert_eq!(acc["series"][0]["points"], json!([[30, 0.75]]));
        let dist = &figs[5].contents;
        assert!(dist.contains("0.75"), "{dist}");
        assert_eq!(figs[4].contents, "strategy,T_s,v_T,relocators,train_length,tasks,share\nstackable,900,8,30,2,3,0.75\nstackable,900,8,30,5,1,0.25\n");
    }

    #[test]
    fn bad_values_are_reported() {
        let runs = "run,strategy,T_s,v_T,relocators,acceptance\n0,none,abc,8,30,0.75\n";
        let err = build_figures(runs, "run,minute,busy_relocators\n", "run,train_length,tasks\n").unwrap_err();
        assert!(matches!(err, ReportError::BadValue { column: "T_s", line: 2, .. }));
    }
}
