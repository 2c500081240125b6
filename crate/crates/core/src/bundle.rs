//! Scenario bundles: a directory holding a trace, an optional config file and
//! a manifest with SHA-256 hashes of every file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::demand::derive_travel_times;
use crate::domain::{DemandTrace, Seconds};
use crate::io::{self, IoError};

pub const FORMAT_VERSION: u32 = 1;
pub const STATIONS_FILE: &str = "stations.csv";
pub const DEMAND_FILE: &str = "demand.csv";
pub const TRAVEL_TIMES_FILE: &str = "travel_times.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum TravelTimeSource {
    File,
    /// Matrix derived from straight-line distance at this speed.
    Derived { speed_mps: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: Option<u64>,
    pub generator: String,
    pub horizon_s: Seconds,
    pub travel_times: TravelTimeSource,
    /// File name to lowercase hex SHA-256.
    pub hashes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBundle {
    pub trace: DemandTrace,
    /// Raw text of the simulation config, if any.
    pub config: Option<String>,
    pub manifest: Manifest,
}

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("unsupported bundle format version {0}")]
    UnknownVersion(u32),
    #[error("hash mismatch for {file}: manifest {expected}, file {actual}")]
    HashMismatch { file: String, expected: String, actual: String },
    #[error("{0} is missing")]
    MissingFile(String),
}

impl From<std::io::Error> for BundleError {
    fn from(e: std::io::Error) -> Self {
        BundleError::Io(IoError::Io(e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), IoError>) -> Result<Vec<u8>, IoError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Writes every file of `bundle` to `dir` and returns the manifest actually
/// written, with fresh hashes.
pub fn save_bundle(bundle: &ScenarioBundle, dir: &Path) -> Result<Manifest, BundleError> {
    fs::create_dir_all(dir)?;
    let trace = &bundle.trace;
    let mut files: Vec<(&str, Vec<u8>)> = vec![
        (STATIONS_FILE, csv_bytes(|b| io::write_stations(b, &trace.stations))?),
        (DEMAND_FILE, csv_bytes(|b| io::write_demand(b, &trace.trips))?),
    ];
    if bundle.manifest.travel_times == TravelTimeSource::File {
        files.push((TRAVEL_TIMES_FILE, csv_bytes(|b| io::write_travel_times(b, &trace.travel_times))?));
    }
    if let Some(cfg) = &bundle.config {
        files.push((CONFIG_FILE, cfg.as_bytes().to_vec()));
    }

    let mut manifest = bundle.manifest.clone();
    manifest.format_version = FORMAT_VERSION;
    manifest.horizon_s = trace.horizon;
    manifest.hashes.clear();
    for (name, bytes) in &files {
        fs::write(dir.join(name), bytes)?;
        manifest.hashes.insert((*name).to_string(), sha256_hex(bytes));
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(manifest)
}

fn read_checked(dir: &Path, name: &str, manifest: &Manifest) -> Result<Option<Vec<u8>>, BundleError> {
    let path = dir.join(name);
    if !path.exists() {
        return match manifest.hashes.contains_key(name) {
            true => Err(BundleError::MissingFile(name.to_string())),
            false => Ok(None),
        };
    }
    let bytes = fs::read(&path)?;
    if let Some(expected) = manifest.hashes.get(name) {
        let actual = sha256_hex(&bytes);
        if &actual != expected {
            return Err(BundleError::HashMismatch { file: name.to_string(), expected: expected.clone(), actual });
        }
    }
    Ok(Some(bytes))
}

/// Loads and hash-verifies a bundle. When `travel_times.csv` is absent the
/// matrix is derived at `derive_speed` (or the speed recorded in the
/// manifest) and the manifest records the derivation.
pub fn load_bundle(dir: &Path, derive_speed: Option<f64>) -> Result<ScenarioBundle, BundleError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(BundleError::MissingFile(MANIFEST_FILE.to_string()));
    }
    let mut manifest: Manifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(BundleError::UnknownVersion(manifest.format_version));
    }

    let stations_bytes = read_checked(dir, STATIONS_FILE, &manifest)?
        .ok_or_else(|| BundleError::MissingFile(STATIONS_FILE.to_string()))?;
    let demand_bytes = read_checked(dir, DEMAND_FILE, &manifest)?
        .ok_or_else(|| BundleError::MissingFile(DEMAND_FILE.to_string()))?;
    let stations = io::read_stations(stations_bytes.as_slice())?;

    let times = match read_checked(dir, TRAVEL_TIMES_FILE, &manifest)? {
        Some(bytes) => {
            manifest.travel_times = TravelTimeSource::File;
            io::read_travel_times(bytes.as_slice())?
        }
        None => {
            let speed = match (derive_speed, &manifest.travel_times) {
                (Some(s), _) => s,
                (None, TravelTimeSource::Derived { speed_mps }) => *speed_mps,
                (None, TravelTimeSource::File) => {
                    return Err(BundleError::MissingFile(TRAVEL_TIMES_FILE.to_string()))
                }
            };
            manifest.travel_times = TravelTimeSource::Derived { speed_mps: speed };
            derive_travel_times(&stations, speed)
                .map_err(|e| IoError::Parse { file: "travel_times", line: 0, msg: e.to_string() })?
        }
    };

    let trips = io::resolve_demand(&io::read_demand(demand_bytes.as_slice())?, &times);
    let config = read_checked(dir, CONFIG_FILE, &manifest)?
        .map(|b| String::from_utf8_lossy(&b).into_owned());
    let trace = DemandTrace::new(stations, times, trips, manifest.horizon_s);
    Ok(ScenarioBundle { trace, config, manifest })
}
