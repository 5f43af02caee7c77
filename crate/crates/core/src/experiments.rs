//! Experiment runs behind the command-line tool: SINR CCDFs, parameter
//! sweeps and altitude interference profiles, written as CSV tables with a
//! JSON manifest that is sufficient to regenerate them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{coverage_probability, drone_coverage_approx, interference_summary, QuadratureSpec};
use crate::config::{db_to_linear, linear_to_db, ScenarioConfig};
use crate::error::{ConfigError, Error, Result};
use crate::model::Scenario;
use crate::montecarlo::{estimate_ccdf, estimate_coverage, estimate_interference, serving_stats, RandomizationSpec};

pub const TOOL_NAME: &str = "skycov";
pub const DEFAULT_MC_N: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

/// Histogram bin used when the interference profile collects serving stats.
const PROFILE_BIN_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Theorem2,
    MonteCarlo,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Theorem2 => "theorem2",
            Engine::MonteCarlo => "monte_carlo",
        }
    }

    /// Parses a comma-separated engine list.
    pub fn parse_list(s: &str) -> Result<Vec<Engine>, ConfigError> {
        let v = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err(ConfigError::new("engines", "must name at least one engine"));
        }
        Ok(v)
    }
}

impl FromStr for Engine {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "theorem2" => Ok(Engine::Theorem2),
            "monte_carlo" | "mc" => Ok(Engine::MonteCarlo),
            _ => Err(ConfigError::new("engines", format!("unknown engine {s:?} (expected analytic, theorem2 or monte_carlo)"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    BsHeight,
    DroneAltitude,
    BeamwidthPhi,
    DensityLambda,
    /// Grid values in dB.
    Threshold,
    /// Grid values are `lambda:h_bs` pairs.
    BsDensityAndHeight,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        SweepParam::BsHeight,
        SweepParam::DroneAltitude,
        SweepParam::BeamwidthPhi,
        SweepParam::DensityLambda,
        SweepParam::Threshold,
        SweepParam::BsDensityAndHeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::BsHeight => "bs_height",
            SweepParam::DroneAltitude => "drone_altitude",
            SweepParam::BeamwidthPhi => "beamwidth_phi",
            SweepParam::DensityLambda => "density_lambda",
            SweepParam::Threshold => "threshold",
            SweepParam::BsDensityAndHeight => "bs_density_and_height",
        }
    }

    /// CSV column names of the swept value(s).
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            SweepParam::BsHeight => &["h_bs"],
            SweepParam::DroneAltitude => &["h_d"],
            SweepParam::BeamwidthPhi => &["phi_b_deg"],
            SweepParam::DensityLambda => &["lambda_bs"],
            SweepParam::Threshold => &["threshold_db"],
            SweepParam::BsDensityAndHeight => &["lambda_bs", "h_bs"],
        }
    }

    /// Parses a comma-separated grid.
    pub fn parse_grid(self, s: &str) -> Result<Vec<GridValue>, ConfigError> {
        let bad = |t: &str| ConfigError::new("grid", format!("cannot parse {t:?}"));
        let num = |t: &str| t.trim().parse::<f64>().ok().filter(|x| x.is_finite());
        let grid = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| match self {
                SweepParam::BsDensityAndHeight => {
                    let (l, h) = t.split_once(':').ok_or_else(|| bad(t))?;
                    Ok(GridValue::Pair(num(l).ok_or_else(|| bad(t))?, num(h).ok_or_else(|| bad(t))?))
                }
                _ => num(t).map(GridValue::Scalar).ok_or_else(|| bad(t)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if grid.is_empty() {
            return Err(ConfigError::new("grid", "must not be empty"));
        }
        Ok(grid)
    }

    /// Applies one grid value to a copy of `cfg` and validates it.
    pub fn apply(self, cfg: &ScenarioConfig, value: GridValue) -> Result<ScenarioConfig, ConfigError> {
        let mut c = *cfg;
        match (self, value) {
            (SweepParam::BsDensityAndHeight, GridValue::Pair(l, h)) => {
                c.lambda_bs = l;
                c.antenna.h_bs = h;
            }
            (SweepParam::BsDensityAndHeight, GridValue::Scalar(_)) | (_, GridValue::Pair(..)) => {
                return Err(ConfigError::new("grid", format!("value {value} does not fit parameter {}", self.name())));
            }
            (SweepParam::BsHeight, GridValue::Scalar(x)) => c.antenna.h_bs = x,
            (SweepParam::DroneAltitude, GridValue::Scalar(x)) => c.user.h_d = x,
            (SweepParam::BeamwidthPhi, GridValue::Scalar(x)) => c.user.phi_b_deg = x,
            (SweepParam::DensityLambda, GridValue::Scalar(x)) => c.lambda_bs = x,
            (SweepParam::Threshold, GridValue::Scalar(x)) => c.threshold_t = db_to_linear(x),
        }
        c.validate()
            .map_err(|e| ConfigError::new(e.field, format!("{} (at {} = {value})", e.reason, self.name())))?;
        Ok(c)
    }
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ConfigError::new("param", format!("unknown sweep parameter {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Scalar(f64),
    Pair(f64, f64),
}

impl GridValue {
    fn cells(self) -> Vec<Cell> {
        match self {
            GridValue::Scalar(x) => vec![Cell::Num(x)],
            GridValue::Pair(a, b) => vec![Cell::Num(a), Cell::Num(b)],
        }
    }

    /// Grouping key for the argmax column: the density of a pair sweep.
    fn group(self) -> Option<u64> {
        match self {
            GridValue::Scalar(_) => None,
            GridValue::Pair(l, _) => Some(l.to_bits()),
        }
    }
}

impl fmt::Display for GridValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridValue::Scalar(x) => write!(f, "{x}"),
            GridValue::Pair(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

/// Scenario plus the numerical settings of both engines, as read from a
/// run configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub quadrature: QuadratureSpec,
    pub randomization: RandomizationSpec,
}

impl RunConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            scenario,
            quadrature: QuadratureSpec::default(),
            randomization: RandomizationSpec::default(),
        }
    }

    /// Parses a TOML file with the scenario keys at the top level and
    /// optional `[quadrature]` and `[randomization]` tables.
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(s).map_err(|e| ConfigError::new("<file>", e.to_string()))?;
        let quadrature = match table.remove("quadrature") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| ConfigError::new("quadrature", e.to_string()))?,
            None => QuadratureSpec::default(),
        };
        let randomization = match table.remove("randomization") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| ConfigError::new("randomization", e.to_string()))?,
            None => RandomizationSpec::default(),
        };
        let scenario: ScenarioConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::new("<file>", e.to_string()))?;
        let run = Self {
            scenario,
            quadrature,
            randomization,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn to_toml_string(&self) -> String {
        let mut table = toml::Table::try_from(self.scenario).expect("scenario config is always serializable");
        let mut put = |key: &str, v: toml::Table| {
            if !v.is_empty() {
                table.insert(key.into(), toml::Value::Table(v));
            }
        };
        put("quadrature", toml::Table::try_from(self.quadrature).expect("serializable"));
        put("randomization", toml::Table::try_from(self.randomization).expect("serializable"));
        toml::to_string(&table).expect("serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario.validate()?;
        let scenario = self.quadrature.scenario(&self.scenario)?;
        self.randomization.validate(&scenario)
    }

    fn with_scenario(&self, scenario: ScenarioConfig) -> Self {
        Self { scenario, ..*self }
    }

    fn build(&self) -> Result<Scenario, ConfigError> {
        self.quadrature.scenario(&self.scenario)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunRequest {
    Ccdf {
        thresholds_db: Vec<f64>,
        engines: Vec<Engine>,
    },
    Sweep {
        parameter: SweepParam,
        grid: Vec<GridValue>,
        engines: Vec<Engine>,
    },
    Interference {
        altitudes: Vec<f64>,
        engines: Vec<Engine>,
    },
}

impl RunRequest {
    pub fn command(&self) -> &'static str {
        match self {
            RunRequest::Ccdf { .. } => "ccdf",
            RunRequest::Sweep { .. } => "sweep",
            RunRequest::Interference { .. } => "interference",
        }
    }

    fn engines(&self) -> &[Engine] {
        match self {
            RunRequest::Ccdf { engines, .. } | RunRequest::Sweep { engines, .. } | RunRequest::Interference { engines, .. } => engines,
        }
    }
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: RunConfig,
    pub mc_n: u64,
    pub seed: u64,
    pub request: RunRequest,
}

/// Everything needed to regenerate an output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub mc_n: u64,
    /// Resolved run configuration in the configuration-file format.
    pub config_toml: String,
    pub request: RunRequest,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    /// Engines that were skipped and why.
    pub notes: Vec<String>,
}

impl Experiment {
    pub fn manifest(&self, notes: &[String]) -> Manifest {
        Manifest {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: self.seed,
            mc_n: self.mc_n,
            config_toml: self.config.to_toml_string(),
            request: self.request.clone(),
            notes: notes.to_vec(),
        }
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        Ok(Self {
            config: RunConfig::from_toml_str(&m.config_toml)?,
            mc_n: m.mc_n,
            seed: m.seed,
            request: m.request.clone(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.config.validate()?;
        if self.request.engines().is_empty() {
            return Err(ConfigError::new("engines", "must name at least one engine"));
        }
        if self.request.engines().contains(&Engine::MonteCarlo) && self.mc_n == 0 {
            return Err(ConfigError::new("mc_n", "must be at least 1"));
        }
        let nonempty = |field: &str, n: usize| {
            if n == 0 {
                Err(ConfigError::new(field, "must not be empty"))
            } else {
                Ok(())
            }
        };
        match &self.request {
            RunRequest::Ccdf { thresholds_db, .. } => {
                nonempty("grid", thresholds_db.len())?;
                if thresholds_db.iter().any(|t| !t.is_finite()) {
                    return Err(ConfigError::new("grid", "thresholds must be finite dB values"));
                }
            }
            RunRequest::Sweep { grid, .. } => nonempty("grid", grid.len())?,
            RunRequest::Interference { altitudes, .. } => {
                nonempty("grid", altitudes.len())?;
                if !self.config.scenario.is_drone() {
                    return Err(ConfigError::new("user.kind", "the interference profile needs a drone user"));
                }
            }
        }
        Ok(())
    }

    pub fn run(&self) -> Result<RunOutput> {
        self.validate()?;
        match &self.request {
            RunRequest::Ccdf { thresholds_db, engines } => self.run_ccdf(thresholds_db, engines),
            RunRequest::Sweep { parameter, grid, engines } => self.run_sweep(*parameter, grid, engines),
            RunRequest::Interference { altitudes, engines } => self.run_interference(altitudes, engines),
        }
    }

    /// Drops the drone approximation for ground users, with a note.
    fn applicable(&self, engines: &[Engine], notes: &mut Vec<String>) -> Vec<Engine> {
        let mut out = Vec::new();
        for &e in engines {
            if e == Engine::Theorem2 && !self.config.scenario.is_drone() {
                notes.push("theorem2 skipped: the LoS-only approximation applies to drone users only".into());
            } else if !out.contains(&e) {
                out.push(e);
            }
        }
        out
    }

    fn analytic_value(&self, run: &RunConfig, engine: Engine) -> Result<f64> {
        let s = run.build()?;
        let rep = match engine {
            Engine::Theorem2 => drone_coverage_approx(&s, &run.quadrature)?,
            _ => coverage_probability(&s, &run.quadrature)?,
        };
        Ok(rep.coverage)
    }

    fn run_ccdf(&self, thresholds_db: &[f64], engines: &[Engine]) -> Result<RunOutput> {
        let mut notes = Vec::new();
        let engines = self.applicable(engines, &mut notes);
        let mut table = Table::new(["threshold_db", "engine", "value", "stderr"]);
        for engine in engines {
            if engine == Engine::MonteCarlo {
                let s = self.config.build()?;
                let t: Vec<f64> = thresholds_db.iter().map(|&d| db_to_linear(d)).collect();
                let curve = estimate_ccdf(&s, &self.config.randomization, &t, self.mc_n, self.seed);
                for (&d, est) in thresholds_db.iter().zip(&curve.estimates) {
                    table.push(vec![Cell::Num(d), Cell::text(engine.name()), Cell::Num(est.mean), Cell::Num(est.stderr)]);
                }
                continue;
            }
            for &d in thresholds_db {
                let run = self.config.with_scenario(SweepParam::Threshold.apply(&self.config.scenario, GridValue::Scalar(d))?);
                let v = self.analytic_value(&run, engine)?;
                table.push(vec![Cell::Num(d), Cell::text(engine.name()), Cell::Num(v), Cell::Empty]);
            }
        }
        Ok(RunOutput { table, notes })
    }

    fn run_sweep(&self, param: SweepParam, grid: &[GridValue], engines: &[Engine]) -> Result<RunOutput> {
        let mut notes = Vec::new();
        let engines = self.applicable(engines, &mut notes);
        let mut header: Vec<&str> = param.columns().to_vec();
        header.extend(["engine", "coverage", "stderr", "argmax"]);
        let mut table = Table::new(header);
        let mut points = Vec::new();
        for &g in grid {
            let run = self.config.with_scenario(param.apply(&self.config.scenario, g)?);
            for &engine in &engines {
                let (v, se) = match engine {
                    Engine::MonteCarlo => {
                        let s = run.build()?;
                        run.randomization.validate(&s)?;
                        let est = estimate_coverage(&s, &run.randomization, self.mc_n, self.seed);
                        (est.mean, Some(est.stderr))
                    }
                    _ => (self.analytic_value(&run, engine)?, None),
                };
                points.push((g, engine, v, se));
            }
        }
        let best = argmax_flags(&points);
        for ((g, engine, v, se), flag) in points.into_iter().zip(best) {
            let mut row = g.cells();
            row.extend([Cell::text(engine.name()), Cell::Num(v), se.map_or(Cell::Empty, Cell::Num), Cell::Int(flag as u64)]);
            table.push(row);
        }
        Ok(RunOutput { table, notes })
    }

    fn run_interference(&self, altitudes: &[f64], engines: &[Engine]) -> Result<RunOutput> {
        let mut notes = Vec::new();
        let mut table = Table::new([
            "h_d",
            "engine",
            "mean_interference",
            "mean_interference_db",
            "stderr",
            "mean_serving_distance",
            "conditional_interference_at_mean_distance",
        ]);
        let mut used = Vec::new();
        for &e in engines {
            if e == Engine::Theorem2 {
                notes.push("theorem2 skipped: it is a coverage approximation with no interference profile".into());
            } else if !used.contains(&e) {
                used.push(e);
            }
        }
        for &h in altitudes {
            let run = self.config.with_scenario(SweepParam::DroneAltitude.apply(&self.config.scenario, GridValue::Scalar(h))?);
            let s = run.build()?;
            for &engine in &used {
                let row = if engine == Engine::Analytic {
                    let sum = interference_summary(&s, &run.quadrature)?;
                    vec![
                        Cell::Num(sum.mean_interference),
                        Cell::Num(linear_to_db(sum.mean_interference)),
                        Cell::Empty,
                        Cell::Num(sum.mean_serving_distance),
                        Cell::Num(sum.conditional_at_mean_distance),
                    ]
                } else {
                    run.randomization.validate(&s)?;
                    let est = estimate_interference(&s, &run.randomization, self.mc_n, self.seed);
                    let stats = serving_stats(&s, &run.randomization, self.mc_n, self.seed, PROFILE_BIN_M);
                    vec![
                        Cell::Num(est.mean),
                        Cell::Num(linear_to_db(est.mean)),
                        Cell::Num(est.stderr),
                        Cell::Num(stats.mean_serving_distance),
                        Cell::Empty,
                    ]
                };
                let mut full = vec![Cell::Num(h), Cell::text(engine.name())];
                full.extend(row);
                table.push(full);
            }
        }
        Ok(RunOutput { table, notes })
    }
}

/// Marks, per engine and per density group, the first grid point with the
/// largest coverage.
fn argmax_flags(points: &[(GridValue, Engine, f64, Option<f64>)]) -> Vec<bool> {
    let mut flags = vec![false; points.len()];
    for (i, (g, e, v, _)) in points.iter().enumerate() {
        let beaten = points
            .iter()
            .enumerate()
            .any(|(j, (g2, e2, v2, _))| e2 == e && g2.group() == g.group() && (v2 > v || (v2 == v && j < i)));
        flags[i] = !beaten;
    }
    flags
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros removed,
/// exponent notation outside `[1e-4, 1e9)`.
pub fn format_g9(x: f64) -> String {
    const SIG: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (SIG - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn text(s: &str) -> Self {
        Cell::Text(s.to_string())
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_g9(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(Cell::render))?;
        }
        wr.flush().map_err(Error::Io)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        // reference strings from C printf("%.9g")
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (-2.5e-7, "-2.5e-07"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (3.380_806_771e-9, "3.38080677e-09"),
            (0.999999999_7, "1"),
            (-6.0, "-6"),
            (f64::NEG_INFINITY, "-inf"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g9(x), s, "{x}");
        }
    }

    #[test]
    fn grid_parsing() {
        let g = SweepParam::BsHeight.parse_grid("10, 15,20").unwrap();
        assert_eq!(g, vec![GridValue::Scalar(10.0), GridValue::Scalar(15.0), GridValue::Scalar(20.0)]);
        let g = SweepParam::BsDensityAndHeight.parse_grid("10:20,100:35").unwrap();
        assert_eq!(g[1], GridValue::Pair(100.0, 35.0));
        assert!(SweepParam::BsHeight.parse_grid("").is_err());
        assert!(SweepParam::BsHeight.parse_grid("1,x").is_err());
        assert!(SweepParam::BsDensityAndHeight.parse_grid("10").is_err());
        assert_eq!("density_lambda".parse::<SweepParam>().unwrap(), SweepParam::DensityLambda);
        assert_eq!(Engine::parse_list("analytic,mc").unwrap(), vec![Engine::Analytic, Engine::MonteCarlo]);
        assert!(Engine::parse_list("fast").is_err());
    }

    #[test]
    fn apply_validates_grid_values() {
        let cfg = ScenarioConfig::reference_drone();
        let c = SweepParam::Threshold.apply(&cfg, GridValue::Scalar(10.0)).unwrap();
        assert!((c.threshold_t - 10.0).abs() < 1e-12);
        let err = SweepParam::BsHeight.apply(&cfg, GridValue::Scalar(150.0)).unwrap_err();
        assert_eq!(err.field, "user.h_d");
        assert!(SweepParam::DroneAltitude.apply(&ScenarioConfig::reference_ground(), GridValue::Scalar(100.0)).is_err());
    }

    #[test]
    fn argmax_per_engine_and_group() {
        let p = |l: f64, h: f64, e, v| (GridValue::Pair(l, h), e, v, None);
        let pts = [
            p(10.0, 20.0, Engine::Analytic, 0.5),
            p(10.0, 30.0, Engine::Analytic, 0.7),
            p(100.0, 20.0, Engine::Analytic, 0.6),
            p(100.0, 30.0, Engine::Analytic, 0.6),
            p(10.0, 20.0, Engine::MonteCarlo, 0.9),
        ];
        assert_eq!(argmax_flags(&pts), vec![false, true, true, false, true]);
    }

    #[test]
    fn run_config_round_trip() {
        let mut run = RunConfig::new(ScenarioConfig::reference_drone());
        run.randomization.h_bs_range = Some((20.0, 40.0));
        run.quadrature.rel_tol = 1e-7;
        run.scenario.n0_db = f64::NEG_INFINITY;
        let text = run.to_toml_string();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), run);
        let plain = RunConfig::new(ScenarioConfig::reference_ground());
        assert!(!plain.to_toml_string().contains("randomization"));
    }

    #[test]
    fn run_config_errors_name_sections() {
        let base = ScenarioConfig::reference_drone().to_toml_string();
        let e = RunConfig::from_toml_str(&format!("{base}\n[quadrature]\nrel_tol = -1.0\n")).unwrap_err();
        assert_eq!(e.field, "quadrature.rel_tol");
        let e = RunConfig::from_toml_str(&format!("{base}\n[randomization]\nh_bs_range = [40.0, 20.0]\n")).unwrap_err();
        assert_eq!(e.field, "randomization.h_bs_range");
        let e = RunConfig::from_toml_str(&format!("{base}\n[quadrature]\nbogus = 1\n")).unwrap_err();
        assert_eq!(e.field, "quadrature");
    }

    #[test]
    fn csv_round_trips_through_reader() {
        let mut t = Table::new(["x_db", "engine", "value", "stderr"]);
        for (i, x) in [1.0 / 7.0, 2.5e-11, -3.0, 123456.789012345].iter().enumerate() {
            t.push(vec![Cell::Num(*x), Cell::text("analytic"), Cell::Num(x * 3.3), if i % 2 == 0 { Cell::Empty } else { Cell::Num(0.001) }]);
        }
        let text = t.to_csv_string();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), t.header);
        let mut rebuilt = Table::new(t.header.clone());
        for rec in rd.records() {
            let rec = rec.unwrap();
            rebuilt.push(
                rec.iter()
                    .map(|f| match f.parse::<f64>() {
                        _ if f.is_empty() => Cell::Empty,
                        Ok(x) => Cell::Num(x),
                        Err(_) => Cell::text(f),
                    })
                    .collect(),
            );
        }
        assert_eq!(rebuilt.to_csv_string(), text);
    }

    #[test]
    fn ground_ccdf_skips_approximation() {
        let mut run = RunConfig::new(ScenarioConfig::reference_ground());
        run.scenario.lambda_bs = 50.0;
        let exp = Experiment {
            config: run,
            mc_n: 200,
            seed: 3,
            request: RunRequest::Ccdf {
                thresholds_db: vec![0.0],
                engines: vec![Engine::Analytic, Engine::Theorem2, Engine::MonteCarlo],
            },
        };
        let out = exp.run().unwrap();
        assert_eq!(out.table.rows.len(), 2);
        assert_eq!(out.notes.len(), 1);
    }

    #[test]
    fn empty_grid_and_zero_samples_rejected() {
        let exp = Experiment {
            config: RunConfig::new(ScenarioConfig::reference_drone()),
            mc_n: 0,
            seed: 1,
            request: RunRequest::Ccdf {
                thresholds_db: vec![],
                engines: vec![Engine::Analytic],
            },
        };
        assert!(matches!(exp.run(), Err(Error::Config(e)) if e.field == "grid"));
        let exp = Experiment {
            request: RunRequest::Ccdf {
                thresholds_db: vec![0.0],
                engines: vec![Engine::MonteCarlo],
            },
            ..exp
        };
        assert!(matches!(exp.run(), Err(Error::Config(e)) if e.field == "mc_n"));
    }

    #[test]
    fn manifest_replays_identically() {
        let exp = Experiment {
            config: RunConfig::new(ScenarioConfig::reference_drone()),
            mc_n: 500,
            seed: 42,
            request: RunRequest::Sweep {
                parameter: SweepParam::BeamwidthPhi,
                grid: vec![GridValue::Scalar(90.0), GridValue::Scalar(150.0)],
                engines: vec![Engine::Theorem2, Engine::MonteCarlo],
            },
        };
        let out = exp.run().unwrap();
        let m = Manifest::from_json(&exp.manifest(&out.notes).to_json()).unwrap();
        let again = Experiment::from_manifest(&m).unwrap();
        assert_eq!(again, exp);
        assert_eq!(again.run().unwrap().table.to_csv_string(), out.table.to_csv_string());
    }
}
