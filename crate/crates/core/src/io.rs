//! CSV formats for stations, demand and travel times.
//!
//! * stations: header `station_id,x_m,y_m`
//! * demand: header `trip_id,origin,destination,request_time_s,travel_time_s`,
//!   the last column optional; empty means "look up the travel-time matrix"
//! * travel times: no header, one row per origin station, seconds

use std::io::{Read, Write};

use crate::domain::{DemandTrace, Seconds, Station, StationId, TravelTimeMatrix, TripRequest};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{file} line {line}: {msg}")]
    Parse { file: &'static str, line: u64, msg: String },
}

fn parse_err(file: &'static str, line: u64, msg: impl Into<String>) -> IoError {
    IoError::Parse { file, line, msg: msg.into() }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn field<'r>(rec: &'r csv::StringRecord, i: usize, file: &'static str, name: &str) -> Result<&'r str, IoError> {
    rec.get(i)
        .map(str::trim)
        .ok_or_else(|| parse_err(file, line_of(rec), format!("missing column `{name}`")))
}

fn parse<T: std::str::FromStr>(s: &str, rec: &csv::StringRecord, file: &'static str, name: &str) -> Result<T, IoError>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| parse_err(file, line_of(rec), format!("bad `{name}` value `{s}`: {e}")))
}

fn reader<R: Read>(r: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(headers).flexible(true).trim(csv::Trim::All).from_reader(r)
}

/// Reads stations and checks that ids are `0..N` in order.
pub fn read_stations<R: Read>(r: R) -> Result<Vec<Station>, IoError> {
    const F: &str = "stations";
    let mut out = Vec::new();
    for rec in reader(r, true).records() {
        let rec = rec?;
        let id: u32 = parse(field(&rec, 0, F, "station_id")?, &rec, F, "station_id")?;
        let x: f64 = parse(field(&rec, 1, F, "x_m")?, &rec, F, "x_m")?;
        let y: f64 = parse(field(&rec, 2, F, "y_m")?, &rec, F, "y_m")?;
        if id as usize != out.len() {
            return Err(parse_err(F, line_of(&rec), format!("expected station id {}, found {id}", out.len())));
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(F, line_of(&rec), "coordinates must be finite"));
        }
        out.push(Station::new(StationId(id), x, y));
    }
    Ok(out)
}

pub fn write_stations<W: Write>(w: W, stations: &[Station]) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["station_id", "x_m", "y_m"])?;
    for s in stations {
        wr.write_record([s.id.to_string(), s.x.to_string(), s.y.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_travel_times<R: Read>(r: R) -> Result<TravelTimeMatrix, IoError> {
    const F: &str = "travel_times";
    let mut rows = Vec::new();
    for rec in reader(r, false).records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| parse::<Seconds>(v, &rec, F, "seconds"))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    TravelTimeMatrix::from_rows(rows).map_err(|e| parse_err(F, 0, e.to_string()))
}

pub fn write_travel_times<W: Write>(w: W, m: &TravelTimeMatrix) -> Result<(), IoError> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in m.rows() {
        wr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// A demand row before travel-time resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemandRow {
    pub id: u64,
    pub origin: StationId,
    pub destination: StationId,
    pub request_time: Seconds,
    pub travel_time: Option<Seconds>,
}

pub fn read_demand<R: Read>(r: R) -> Result<Vec<DemandRow>, IoError> {
    const F: &str = "demand";
    let mut out = Vec::new();
    for rec in reader(r, true).records() {
        let rec = rec?;
        let travel_time = match rec.get(4).map(str::trim) {
            None | Some("") => None,
            Some(v) => Some(parse::<Seconds>(v, &rec, F, "travel_time_s")?),
        };
        out.push(DemandRow {
            id: parse(field(&rec, 0, F, "trip_id")?, &rec, F, "trip_id")?,
            origin: StationId(parse(field(&rec, 1, F, "origin")?, &rec, F, "origin")?),
            destination: StationId(parse(field(&rec, 2, F, "destination")?, &rec, F, "destination")?),
            request_time: parse(field(&rec, 3, F, "request_time_s")?, &rec, F, "request_time_s")?,
            travel_time,
        });
    }
    Ok(out)
}

/// Fills missing travel times from `times`. Unknown stations keep a zero
/// travel time so that validation can report them.
pub fn resolve_demand(rows: &[DemandRow], times: &TravelTimeMatrix) -> Vec<TripRequest> {
    let n = times.len();
    rows.iter()
        .map(|r| TripRequest {
            id: r.id,
            origin: r.origin,
            destination: r.destination,
            request_time: r.request_time,
            travel_time: r.travel_time.unwrap_or_else(|| {
                if r.origin.index() < n && r.destination.index() < n {
                    times.get(r.origin, r.destination)
                } else {
                    0
                }
            }),
        })
        .collect()
}

pub fn write_demand<W: Write>(w: W, trips: &[TripRequest]) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["trip_id", "origin", "destination", "request_time_s", "travel_time_s"])?;
    for t in trips {
        wr.write_record([
            t.id.to_string(),
            t.origin.to_string(),
            t.destination.to_string(),
            t.request_time.to_string(),
            t.travel_time.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Smallest whole number of days covering every request.
pub fn default_horizon(trips: &[TripRequest]) -> Seconds {
    const DAY: Seconds = 86_400;
    let last = trips.iter().map(|t| t.request_time).max().unwrap_or(0);
    (last / DAY + 1) * DAY
}

/// Reads a complete trace from its three CSV sources.
pub fn read_trace<R1: Read, R2: Read>(
    stations: R1,
    demand: R2,
    times: TravelTimeMatrix,
    horizon: Option<Seconds>,
) -> Result<DemandTrace, IoError> {
    let stations = read_stations(stations)?;
    let trips = resolve_demand(&read_demand(demand)?, &times);
    let horizon = horizon.unwrap_or_else(|| default_horizon(&trips));
    Ok(DemandTrace::new(stations, times, trips, horizon))
}
