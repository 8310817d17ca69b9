//! Configuration-driven scenario runs with JSON reports and CSV dumps.
//!
//! A run parses a strict JSON document, executes one named scenario in
//! natural units anchored at a scenario-specific reference energy, and
//! collects invariant checks. Identical inputs give byte-identical
//! `report.json`; wall-clock data goes to `metadata.json` only.

mod config;
pub mod dump;
mod runners;
pub mod units;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

pub use config::{
    parse_config, BoostPhysics, CheckpointRow, CheckpointTablePhysics, CompositePhysics, ElectronBoxPhysics,
    ElectronPacketPhysics, EnvelopeConfig, Expectation, GridConfig, ModulatePhysics, OutputKind, PhotonBoxPhysics,
    PhotonPacketPhysics, Physics, RowExpectations, ScenarioConfig, ScenarioName, SchrodingerMapPhysics,
};
use dump::DumpUnits;

use crate::constants::{NaturalScale, CODATA_VERSION};
use crate::lattice::{ComplexScalarField, RealVectorField};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("schema error at `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error(transparent)]
    Physics(#[from] crate::Error),
    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl ScenarioError {
    /// Process exit code: 2 schema, 3 physics precondition, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Schema { .. } => 2,
            ScenarioError::Physics(_) => 3,
            ScenarioError::Io { .. } => 4,
        }
    }
}

/// Exit code of a completed run whose checks did not all pass.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gate {
    /// `|measured - expected| <= tolerance |expected|`.
    Relative,
    /// `|measured - expected| <= tolerance`.
    Absolute,
    /// `max(measured / expected, expected / measured) <= tolerance`.
    Factor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Relation the check tests.
    pub anchor: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub gate: Gate,
    pub pass: bool,
}

impl Check {
    pub fn new(name: String, anchor: &str, measured: f64, expected: f64, tolerance: f64, gate: Gate) -> Self {
        let pass = match gate {
            Gate::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Gate::Absolute => (measured - expected).abs() <= tolerance,
            Gate::Factor => {
                measured > 0.0 && expected > 0.0 && (measured / expected).max(expected / measured) <= tolerance
            }
        };
        Self { name, anchor: anchor.to_string(), measured, expected, tolerance, gate, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleRecord {
    pub energy_joule: f64,
    pub length_m: f64,
    pub time_s: f64,
}

impl From<&NaturalScale> for ScaleRecord {
    fn from(s: &NaturalScale) -> Self {
        Self { energy_joule: s.energy_joule, length_m: s.length_m(), time_s: s.time_s() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    /// Unit system of the lattice computation.
    pub units: String,
    /// Reference scale (`None` for closed-form SI scenarios).
    pub natural_scale: Option<ScaleRecord>,
    pub constants: String,
    pub generator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub input: Value,
    pub quantities: Vec<Quantity>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub provenance: Provenance,
    /// Files written next to the report.
    pub outputs: Vec<String>,
}

/// Data a scenario can write as CSV.
#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    Vector { file: String, label: String, field: RealVectorField, units: DumpUnits },
    Complex { file: String, field: ComplexScalarField, units: DumpUnits },
    Probe { file: String, times: Vec<f64>, values: Vec<Complex64>, time_unit: String },
    Spectrum { file: String, omega: Vec<f64>, power: Vec<f64>, frequency_unit: String },
}

impl Artifact {
    fn kind(&self) -> OutputKind {
        match self {
            Artifact::Vector { .. } | Artifact::Complex { .. } => OutputKind::FieldDump,
            Artifact::Probe { .. } | Artifact::Spectrum { .. } => OutputKind::Spectrum,
        }
    }

    fn file(&self) -> &str {
        match self {
            Artifact::Vector { file, .. }
            | Artifact::Complex { file, .. }
            | Artifact::Probe { file, .. }
            | Artifact::Spectrum { file, .. } => file,
        }
    }

    fn write(&self, path: &Path) -> std::io::Result<()> {
        match self {
            Artifact::Vector { label, field, units, .. } => dump::dump_vector_field(field, label, units, path),
            Artifact::Complex { field, units, .. } => dump::dump_complex_field(field, units, path),
            Artifact::Probe { times, values, time_unit, .. } => dump::dump_probe(times, values, time_unit, path),
            Artifact::Spectrum { omega, power, frequency_unit, .. } => {
                dump::dump_spectrum(omega, power, frequency_unit, path)
            }
        }
    }
}

/// A finished run held in memory.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.json";
pub const METADATA_FILE: &str = "metadata.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io { path: path.to_path_buf(), source }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text)
}

/// Runs the scenario without touching the file system.
pub fn execute(cfg: &ScenarioConfig) -> Result<Outcome, ScenarioError> {
    let result = runners::run(cfg)?;
    let artifacts: Vec<Artifact> = result.artifacts.into_iter().filter(|a| cfg.outputs.contains(&a.kind())).collect();
    let mut outputs: Vec<String> = Vec::new();
    if cfg.outputs.contains(&OutputKind::Summary) {
        outputs.push(SUMMARY_FILE.to_string());
    }
    outputs.extend(artifacts.iter().map(|a| a.file().to_string()));
    let passed = result.checks.iter().all(|c| c.pass);
    let report = RunReport {
        scenario: cfg.scenario.as_str().to_string(),
        input: cfg.input.clone(),
        quantities: result.quantities,
        checks: result.checks,
        passed,
        provenance: Provenance {
            units: match result.scale {
                Some(_) => "natural (hbar = c = eps0 = 1), reported in SI".to_string(),
                None => "SI".to_string(),
            },
            natural_scale: result.scale.as_ref().map(ScaleRecord::from),
            constants: CODATA_VERSION.to_string(),
            generator: format!("spinfield {}", env!("CARGO_PKG_VERSION")),
        },
        outputs,
    };
    Ok(Outcome { report, artifacts })
}

/// Deterministic JSON text of a report.
pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn summary_csv(report: &RunReport) -> String {
    let mut s = String::from("name,value,unit\n");
    for q in &report.quantities {
        s.push_str(&format!("{},{:e},{}\n", q.name, q.value, q.unit));
    }
    s
}

/// Writes `report.json`, `metadata.json` and the selected CSV outputs into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path, config_path: Option<&Path>) -> Result<Vec<PathBuf>, ScenarioError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if outcome.report.outputs.iter().any(|o| o == SUMMARY_FILE) {
        let path = dir.join(SUMMARY_FILE);
        fs::write(&path, summary_csv(&outcome.report)).map_err(io_err(&path))?;
        written.push(path);
    }
    for a in &outcome.artifacts {
        let path = dir.join(a.file());
        a.write(&path).map_err(io_err(&path))?;
        written.push(path);
    }
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report_json(&outcome.report)).map_err(io_err(&path))?;
    written.push(path);

    let timestamp =
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut meta = BTreeMap::new();
    meta.insert("timestamp_unix", Value::from(timestamp));
    meta.insert("generator", Value::from(outcome.report.provenance.generator.clone()));
    if let Some(p) = config_path {
        meta.insert("config", Value::from(p.display().to_string()));
    }
    let path = dir.join(METADATA_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    fs::write(&path, text).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

/// Loads, runs and writes one configuration.
pub fn run(config_path: &Path, out_dir: &Path) -> Result<RunReport, ScenarioError> {
    let cfg = load_config(config_path)?;
    let outcome = execute(&cfg)?;
    write_outcome(&outcome, out_dir, Some(config_path))?;
    Ok(outcome.report)
}
