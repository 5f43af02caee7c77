use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skycov::experiments::{Engine, Experiment, GridValue, Manifest, RunConfig, RunOutput, RunRequest, SweepParam, DEFAULT_MC_N, DEFAULT_SEED};
use skycov::{ConfigError, Error};

const DEFAULT_CCDF_GRID: &str = "-10,-8,-6,-4,-2,0,2,4,6,8,10,12,14,16,18,20";

#[derive(Parser)]
#[command(name = "skycov", version, about = "Downlink coverage of ground and drone users in cellular networks")]
struct Cli {
    /// Worker threads (0 or unset: one per core).
    #[arg(long, env = "SKYCOV_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SINR CCDF over a threshold grid in dB.
    Ccdf {
        #[command(flatten)]
        common: Common,
        /// Thresholds in dB.
        #[arg(long, default_value = DEFAULT_CCDF_GRID, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value = "analytic,theorem2,monte_carlo")]
        engines: String,
    },
    /// Coverage over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// bs_height, drone_altitude, beamwidth_phi, density_lambda,
        /// threshold (dB) or bs_density_and_height (lambda:h pairs).
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value = "analytic")]
        engines: String,
    },
    /// Mean interference over a grid of drone altitudes.
    Interference {
        #[command(flatten)]
        common: Common,
        /// Drone altitudes in meters.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "analytic,monte_carlo")]
        engines: String,
    },
    /// Check a configuration file and print derived geometry.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerate a CSV from its manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; stdout when absent. The manifest goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long = "mc-n", default_value_t = DEFAULT_MC_N)]
    mc_n: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::new("SKYCOV_WORKERS", e.to_string()))?;
    }
    let (common, request) = match cli.command {
        Command::Validate { config } => return validate(&config),
        Command::Replay { manifest, out } => return replay(&manifest, out.as_deref()),
        Command::Ccdf { common, grid, engines } => {
            let thresholds_db = scalars(SweepParam::Threshold, &grid)?;
            let engines = Engine::parse_list(&engines)?;
            (common, RunRequest::Ccdf { thresholds_db, engines })
        }
        Command::Sweep { common, param, grid, engines } => {
            let parameter: SweepParam = param.parse()?;
            let grid = parameter.parse_grid(&grid)?;
            let engines = Engine::parse_list(&engines)?;
            (common, RunRequest::Sweep { parameter, grid, engines })
        }
        Command::Interference { common, grid, engines } => {
            let altitudes = scalars(SweepParam::DroneAltitude, &grid)?;
            let engines = Engine::parse_list(&engines)?;
            (common, RunRequest::Interference { altitudes, engines })
        }
    };
    let exp = Experiment {
        config: load_config(&common.config)?,
        mc_n: common.mc_n,
        seed: common.seed,
        request,
    };
    let out = exp.run()?;
    emit(&exp, &out, common.out.as_deref())
}

fn scalars(param: SweepParam, grid: &str) -> Result<Vec<f64>, ConfigError> {
    Ok(param
        .parse_grid(grid)?
        .into_iter()
        .filter_map(|g| match g {
            GridValue::Scalar(x) => Some(x),
            GridValue::Pair(..) => None,
        })
        .collect())
}

fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
    Ok(RunConfig::from_toml_str(&text)?)
}

/// `results.csv` -> `results.manifest.json`.
fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn emit(exp: &Experiment, out: &RunOutput, path: Option<&Path>) -> Result<(), Error> {
    for note in &out.notes {
        eprintln!("note: {note}");
    }
    match path {
        None => print!("{}", out.table.to_csv_string()),
        Some(p) => {
            fs::write(p, out.table.to_csv_string())?;
            fs::write(manifest_path(p), exp.manifest(&out.notes).to_json())?;
        }
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), Error> {
    let run = load_config(path)?;
    let s = run.quadrature.scenario(&run.scenario)?;
    let user = if s.is_drone() { "drone" } else { "ground" };
    println!("ok: {user} user, lambda = {} per km^2", run.scenario.lambda_bs);
    println!("mainlobe region: {}", s.mainlobe_region());
    if s.is_drone() {
        println!("footprint radius r_max = {:.3} m, mainlobe start r0 = {:.3} m", s.r_max(), s.r0());
    } else {
        println!("truncation radius = {:.3} m", s.outer_radius());
    }
    if !run.randomization.is_fixed() {
        println!("sampling disk radius = {:.3} m", run.randomization.disk_radius(&s));
    }
    Ok(())
}

fn replay(manifest: &Path, out: Option<&Path>) -> Result<(), Error> {
    let text = fs::read_to_string(manifest).map_err(|e| ConfigError::new("--manifest", format!("{}: {e}", manifest.display())))?;
    let m = Manifest::from_json(&text)?;
    let exp = Experiment::from_manifest(&m)?;
    let result = exp.run()?;
    match out {
        None => print!("{}", result.table.to_csv_string()),
        Some(p) => fs::write(p, result.table.to_csv_string())?,
    }
    Ok(())
}
