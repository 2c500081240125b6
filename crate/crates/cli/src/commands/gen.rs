use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use relocsim::bundle::{save_bundle, Manifest, ScenarioBundle, TravelTimeSource, FORMAT_VERSION};
use relocsim::demand::{
    commuter_profile, daytime_curve, deploy_stations, derive_travel_times, grid_stations, synthesize_demand,
    BoundingBox, DemandProfile, GridDeploymentConfig, DAY, DEFAULT_CELL_SIDE_M, DEFAULT_SPEED_MPS,
};
use relocsim::domain::Station;
use relocsim::fleet::{estimate_rates, solve_fluid};
use relocsim::reference;
use relocsim::rebalance::ControlPolicy;
use relocsim::sweep::SweepGrid;
use relocsim::SimulationConfig;

use crate::config::ConfigFile;
use crate::error::{read_file, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Morning inflow to central stations, evening outflow, daytime background.
    Commuter,
    /// Equal rates between every pair during the day.
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output bundle directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the shipped reference scenario; other generation flags are ignored.
    #[arg(long)]
    pub reference: bool,
    #[arg(long, value_enum, default_value = "commuter")]
    pub preset: Preset,
    /// Grid columns when no facility file is given.
    #[arg(long, default_value_t = reference::COLS)]
    pub cols: usize,
    #[arg(long, default_value_t = reference::ROWS)]
    pub rows: usize,
    /// Distance between neighbouring grid stations, metres.
    #[arg(long, default_value_t = reference::SPACING_M)]
    pub spacing: f64,
    /// CSV of facility coordinates (x_m,y_m); a station is placed in every occupied cell.
    #[arg(long)]
    pub facilities: Option<PathBuf>,
    /// Cell side for facility-based deployment, metres.
    #[arg(long, default_value_t = DEFAULT_CELL_SIDE_M)]
    pub cell_side: f64,
    /// Expected number of trips per day.
    #[arg(long, default_value_t = reference::DAILY_TRIPS)]
    pub trips: f64,
    #[arg(long, default_value_t = 1)]
    pub days: u64,
    #[arg(long, default_value_t = reference::SEED)]
    pub seed: u64,
    /// Vehicle speed for travel times, m/s.
    #[arg(long, default_value_t = DEFAULT_SPEED_MPS)]
    pub speed: f64,
    /// Leave travel_times.csv out; readers derive it from the recorded speed.
    #[arg(long)]
    pub derived_times: bool,
}

fn read_facilities(path: &Path) -> Result<Vec<(f64, f64)>> {
    let bytes = read_file(path)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, e))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::input(path, format!("row {}: expected two finite numbers", i + 1)))
        };
        out.push((num(0)?, num(1)?));
    }
    Ok(out)
}

fn stations(args: &GenArgs) -> Result<Vec<Station>> {
    match &args.facilities {
        Some(path) => {
            let facilities = read_facilities(path)?;
            let bbox = BoundingBox::around(&facilities)
                .ok_or_else(|| CliError::input(path, "no facilities listed"))?;
            // A box of zero width still needs one cell.
            let bbox = BoundingBox {
                max_x: bbox.max_x.max(bbox.min_x + args.cell_side),
                max_y: bbox.max_y.max(bbox.min_y + args.cell_side),
                ..bbox
            };
            let cfg = GridDeploymentConfig { cell_side: args.cell_side, bbox, facilities };
            deploy_stations(&cfg).map_err(CliError::config)
        }
        None => {
            if args.cols * args.rows < 2 {
                return Err(CliError::config("the grid needs at least two stations"));
            }
            if !(args.spacing.is_finite() && args.spacing > 0.0) {
                return Err(CliError::config("--spacing must be positive"));
            }
            Ok(grid_stations(args.cols, args.rows, args.spacing))
        }
    }
}

fn uniform_profile(n: usize, total: f64, horizon: u64) -> DemandProfile {
    let rates = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 1.0 }).collect();
    let mut p = DemandProfile::single(n, rates, daytime_curve(), horizon);
    let mass = p.expected_trips();
    if mass > 0.0 {
        p.scale(total / mass);
    }
    p
}

pub fn run(args: GenArgs) -> Result<()> {
    let (trace, seed, generator, speed) = if args.reference {
        (reference::reference_trace(), reference::SEED, "reference".to_string(), reference::SPEED_MPS)
    } else {
        if args.days == 0 {
            return Err(CliError::config("--days must be at least 1"));
        }
        if !(args.trips.is_finite() && args.trips >= 0.0) {
            return Err(CliError::config("--trips must be non-negative"));
        }
        let st = stations(&args)?;
        if st.len() < 2 {
            return Err(CliError::config(format!("deployment produced {} station(s), need at least 2", st.len())));
        }
        let times = derive_travel_times(&st, args.speed).map_err(CliError::config)?;
        let horizon = DAY * args.days;
        let total = args.trips * args.days as f64;
        let profile = match args.preset {
            Preset::Commuter => commuter_profile(&st, total, horizon),
            Preset::Uniform => uniform_profile(st.len(), total, horizon),
        };
        let trace = synthesize_demand(&profile, &st, &times, args.seed).map_err(CliError::config)?;
        let name = match args.preset {
            Preset::Commuter => "commuter",
            Preset::Uniform => "uniform",
        };
        (trace, args.seed, name.to_string(), args.speed)
    };

    let fleet = if trace.trips.is_empty() {
        0
    } else {
        let rates = estimate_rates(&trace).map_err(CliError::config)?;
        let sol = solve_fluid(&rates, &trace.travel_times).map_err(CliError::config)?;
        (1.2 * sol.min_fleet - 1e-9).ceil().max(0.0) as u32
    };
    let config = ConfigFile {
        simulation: SimulationConfig {
            fleet_size: fleet,
            train_size: reference::TRAIN_SIZE,
            relocators: 15,
            control: ControlPolicy::ConservativeOne,
            ..SimulationConfig::default()
        },
        sweep: Some(SweepGrid {
            train_sizes: vec![reference::TRAIN_SIZE],
            relocators: vec![5, 15, 30],
            ..SweepGrid::default()
        }),
    };

    let travel_times = if args.derived_times {
        TravelTimeSource::Derived { speed_mps: speed }
    } else {
        TravelTimeSource::File
    };
    let bundle = ScenarioBundle {
        manifest: Manifest {
            format_version: FORMAT_VERSION,
            seed: Some(seed),
            generator,
            horizon_s: trace.horizon,
            travel_times,
            hashes: BTreeMap::new(),
        },
        trace,
        config: Some(config.to_toml()),
    };
    save_bundle(&bundle, &args.out)
        .map_err(|e| CliError::Output { path: args.out.clone(), source: std::io::Error::other(e.to_string()) })?;
    eprintln!(
        "wrote {} stations, {} trips, fleet {} to {}",
        bundle.trace.station_count(),
        bundle.trace.trips.len(),
        fleet,
        args.out.display()
    );
    Ok(())
}
