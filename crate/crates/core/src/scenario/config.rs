//! Strict JSON schema for scenario runs.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use super::units::{Beta, Energy, Frequency, Length, Mass, Potential, Time};
use super::ScenarioError;
use crate::lattice::Boundary;
use crate::Helicity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    PhotonPacket,
    PhotonBox,
    ElectronPacket,
    ElectronBox,
    Boost,
    SchrodingerMap,
    Composite,
    Modulate,
    CheckpointTable,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PhotonPacket => "photon-packet",
            ScenarioName::PhotonBox => "photon-box",
            ScenarioName::ElectronPacket => "electron-packet",
            ScenarioName::ElectronBox => "electron-box",
            ScenarioName::Boost => "boost",
            ScenarioName::SchrodingerMap => "schrodinger-map",
            ScenarioName::Composite => "composite",
            ScenarioName::Modulate => "modulate",
            ScenarioName::CheckpointTable => "checkpoint-table",
        }
    }

    /// Base names of the checks the scenario can emit; tolerance overrides must use these.
    pub fn check_names(self) -> &'static [&'static str] {
        match self {
            ScenarioName::PhotonPacket => {
                &["energy-spin-ratio", "momentum-spin-ratio", "spin-quantum", "photon-energy", "photon-momentum"]
            }
            ScenarioName::PhotonBox => &["spin-quantum", "mode-energy", "mode-momentum"],
            ScenarioName::ElectronPacket => &[
                "spin-half",
                "energy-quantum",
                "momentum-quantum",
                "energy-spin-factor",
                "momentum-spin-factor",
                "de-broglie",
            ],
            ScenarioName::ElectronBox => &["eigen-residual", "box-energy", "kinetic-energy"],
            ScenarioName::Boost => &[
                "doppler-ratio",
                "photon-null",
                "rest-frequency",
                "rest-wavevector",
                "de-broglie-after-boost",
                "invariant-phase",
            ],
            ScenarioName::SchrodingerMap => {
                &["rotation-vs-phase", "plane-wave-residual", "norm-drift-per-step", "energy-drift"]
            }
            ScenarioName::Composite => &["composite-rate", "composite-kinetic-rate"],
            ScenarioName::Modulate => &[
                "static-shift",
                "upper-sideband",
                "lower-sideband",
                "sideband-symmetry",
                "bessel-ratio",
                "ledger-closure",
            ],
            ScenarioName::CheckpointTable => {
                &["wavelength-identity", "energy-identity", "expected-wavelength", "expected-energy", "expected-e0"]
            }
        }
    }

    fn outputs(self) -> &'static [OutputKind] {
        match self {
            ScenarioName::Boost | ScenarioName::CheckpointTable => &[OutputKind::Summary],
            ScenarioName::Modulate => &[OutputKind::Summary, OutputKind::FieldDump, OutputKind::Spectrum],
            _ => &[OutputKind::Summary, OutputKind::FieldDump],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    /// `summary.csv` with every computed quantity.
    Summary,
    /// CSV dumps of the lattice fields.
    FieldDump,
    /// Probe series and power spectrum CSVs.
    Spectrum,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    #[serde(default)]
    pub boundary: Option<Boundary>,
    #[serde(default)]
    pub extent: Option<Length>,
    /// Carrier wavelengths spanning the lattice.
    #[serde(default)]
    pub periods: Option<u32>,
}

fn helicity<'de, D: Deserializer<'de>>(d: D) -> Result<Helicity, D::Error> {
    let s = i64::deserialize(d)?;
    Helicity::from_sign(s).map_err(serde::de::Error::custom)
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvelopeConfig {
    Uniform,
    Gaussian { width: Length },
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonPacketPhysics {
    pub frequency: Frequency,
    #[serde(deserialize_with = "helicity")]
    pub helicity: Helicity,
    pub envelope: EnvelopeConfig,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonBoxPhysics {
    pub length: Length,
    pub modes: Vec<u32>,
    #[serde(deserialize_with = "helicity")]
    pub helicity: Helicity,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronPacketPhysics {
    pub mass: Mass,
    pub velocity: Beta,
    #[serde(deserialize_with = "helicity")]
    pub helicity: Helicity,
    pub envelope: EnvelopeConfig,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronBoxPhysics {
    pub mass: Mass,
    pub length: Length,
    pub modes: Vec<u32>,
    #[serde(deserialize_with = "helicity")]
    pub helicity: Helicity,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostPhysics {
    pub photon_frequency: Frequency,
    /// Boost velocity along the photon direction `+z`.
    pub beta: Beta,
    pub electron_mass: Mass,
    /// Electron velocity along `+z`.
    pub electron_velocity: Beta,
    /// Random (4-momentum, event, boost) triples in the phase sweep.
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerMapPhysics {
    pub mass: Mass,
    pub velocity: Beta,
    #[serde(deserialize_with = "helicity")]
    pub helicity: Helicity,
    /// Width of the Gaussian packet used for the conservation run.
    pub width: Length,
    /// Amplitude of the static potential `V0 cos(2 pi z / L)`.
    pub potential: Potential,
    pub dt: Time,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositePhysics {
    pub mass: Mass,
    /// Circumference of the periodic ring.
    pub length: Length,
    /// Wavenumber indices `n` of the plane-wave states `exp(2 pi i n z / L)`.
    pub modes: Vec<i32>,
    /// Carrier periods of the product covered by the fit.
    pub periods: f64,
    pub samples_per_period: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatePhysics {
    pub mass: Mass,
    pub v_static: Potential,
    pub v0: Potential,
    pub photon_frequency: Frequency,
    pub duration: Time,
    pub dt: Time,
}

/// Reference value with either a relative tolerance or a factor gate.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation<Q> {
    pub value: Q,
    #[serde(default)]
    pub rel: Option<f64>,
    #[serde(default)]
    pub factor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowExpectations {
    #[serde(default)]
    pub wavelength: Option<Expectation<Length>>,
    #[serde(default)]
    pub energy: Option<Expectation<Energy>>,
    #[serde(default)]
    pub e0: Option<Expectation<super::units::ElectricField>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointRow {
    #[serde(default)]
    pub frequency: Option<Frequency>,
    #[serde(default)]
    pub energy: Option<Energy>,
    #[serde(default)]
    pub expect: Option<RowExpectations>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointTablePhysics {
    pub rows: Vec<CheckpointRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Physics {
    PhotonPacket(PhotonPacketPhysics),
    PhotonBox(PhotonBoxPhysics),
    ElectronPacket(ElectronPacketPhysics),
    ElectronBox(ElectronBoxPhysics),
    Boost(BoostPhysics),
    SchrodingerMap(SchrodingerMapPhysics),
    Composite(CompositePhysics),
    Modulate(ModulatePhysics),
    CheckpointTable(CheckpointTablePhysics),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioName,
    #[serde(default)]
    grid: Option<GridConfig>,
    physics: Value,
    #[serde(default)]
    outputs: Vec<OutputKind>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub grid: Option<GridConfig>,
    pub physics: Physics,
    pub outputs: Vec<OutputKind>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    /// The document as parsed, echoed into the report.
    pub input: Value,
}

fn schema(key: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema { key: key.into(), message: message.into() }
}

/// Joins a serde path with the field named in an unknown/missing-field message.
fn offending_key(prefix: &str, path: &str, message: &str) -> String {
    let mut key = String::from(prefix);
    if path != "." {
        if !key.is_empty() && !path.starts_with('[') {
            key.push('.');
        }
        key.push_str(path);
    }
    for lead in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(rest) = message.strip_prefix(lead) {
            if lead != "unknown variant `" {
                if let Some(name) = rest.split('`').next() {
                    if !key.is_empty() {
                        key.push('.');
                    }
                    key.push_str(name);
                }
            }
        }
    }
    if key.is_empty() {
        key.push('.');
    }
    key
}

fn typed<T: DeserializeOwned>(prefix: &str, value: Value) -> Result<T, ScenarioError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let message = e.inner().to_string();
        schema(offending_key(prefix, &e.path().to_string(), &message), message)
    })
}

fn physics_for(name: ScenarioName, value: Value) -> Result<Physics, ScenarioError> {
    let p = "physics";
    Ok(match name {
        ScenarioName::PhotonPacket => Physics::PhotonPacket(typed(p, value)?),
        ScenarioName::PhotonBox => Physics::PhotonBox(typed(p, value)?),
        ScenarioName::ElectronPacket => Physics::ElectronPacket(typed(p, value)?),
        ScenarioName::ElectronBox => Physics::ElectronBox(typed(p, value)?),
        ScenarioName::Boost => Physics::Boost(typed(p, value)?),
        ScenarioName::SchrodingerMap => Physics::SchrodingerMap(typed(p, value)?),
        ScenarioName::Composite => Physics::Composite(typed(p, value)?),
        ScenarioName::Modulate => Physics::Modulate(typed(p, value)?),
        ScenarioName::CheckpointTable => Physics::CheckpointTable(typed(p, value)?),
    })
}

enum GridRule {
    /// Traveling carriers: periodic or open; `extent` or `periods`, not both.
    Carrier,
    /// Box length comes from the physics block; only `points` (and a Dirichlet boundary).
    Box,
    /// Periodic ring whose length comes from the physics block.
    Ring,
    /// Needs both `extent` and `periods` (carrier cycles across the lattice).
    ExtentAndPeriods,
    Forbidden,
}

fn grid_rule(name: ScenarioName) -> GridRule {
    match name {
        ScenarioName::PhotonPacket | ScenarioName::ElectronPacket | ScenarioName::SchrodingerMap => GridRule::Carrier,
        ScenarioName::PhotonBox | ScenarioName::ElectronBox => GridRule::Box,
        ScenarioName::Composite => GridRule::Ring,
        ScenarioName::Modulate => GridRule::ExtentAndPeriods,
        ScenarioName::Boost | ScenarioName::CheckpointTable => GridRule::Forbidden,
    }
}

fn check_grid(name: ScenarioName, grid: &Option<GridConfig>) -> Result<(), ScenarioError> {
    let rule = grid_rule(name);
    let g = match (&rule, grid) {
        (GridRule::Forbidden, None) => return Ok(()),
        (GridRule::Forbidden, Some(_)) => return Err(schema("grid", format!("{} takes no grid", name.as_str()))),
        (_, None) => return Err(schema("grid", format!("{} needs a grid", name.as_str()))),
        (_, Some(g)) => g,
    };
    match rule {
        GridRule::Carrier => {
            if g.boundary == Some(Boundary::Dirichlet) {
                return Err(schema("grid.boundary", "traveling packets need a periodic or open lattice"));
            }
            match (g.extent, g.periods) {
                (Some(_), Some(_)) => return Err(schema("grid.periods", "give either extent or periods")),
                (None, None) => return Err(schema("grid.extent", "missing extent (or periods)")),
                _ => {}
            }
        }
        GridRule::Box | GridRule::Ring => {
            let want = if matches!(rule, GridRule::Box) { Boundary::Dirichlet } else { Boundary::Periodic };
            if g.boundary.is_some_and(|b| b != want) {
                return Err(schema(
                    "grid.boundary",
                    format!("{} uses a {want:?} lattice", name.as_str()).to_lowercase(),
                ));
            }
            if g.extent.is_some() {
                return Err(schema("grid.extent", "the lattice spans physics.length"));
            }
            if g.periods.is_some() {
                return Err(schema("grid.periods", "the lattice spans physics.length"));
            }
        }
        GridRule::ExtentAndPeriods => {
            if g.boundary.is_some_and(|b| b != Boundary::Periodic) {
                return Err(schema("grid.boundary", "modulation runs on a periodic lattice"));
            }
            if g.extent.is_none() {
                return Err(schema("grid.extent", "missing extent"));
            }
            if g.periods.is_none() {
                return Err(schema("grid.periods", "missing periods (carrier cycles across the lattice)"));
            }
        }
        GridRule::Forbidden => unreachable!(),
    }
    Ok(())
}

fn check_physics(physics: &Physics, seed: Option<u64>) -> Result<(), ScenarioError> {
    let modes = |m: &[u32]| {
        if m.is_empty() {
            Err(schema("physics.modes", "at least one mode number"))
        } else {
            Ok(())
        }
    };
    match physics {
        Physics::PhotonBox(p) => modes(&p.modes)?,
        Physics::ElectronBox(p) => modes(&p.modes)?,
        Physics::Composite(p) => {
            if p.modes.len() < 2 {
                return Err(schema("physics.modes", "a composite needs at least two modes"));
            }
        }
        Physics::Boost(_) if seed.is_none() => return Err(schema("seed", "boost sweeps need a seed")),
        Physics::CheckpointTable(t) => {
            if t.rows.is_empty() {
                return Err(schema("physics.rows", "at least one row"));
            }
            for (i, row) in t.rows.iter().enumerate() {
                if row.frequency.is_some() == row.energy.is_some() {
                    return Err(schema(format!("physics.rows[{i}]"), "give exactly one of frequency and energy"));
                }
                let Some(e) = &row.expect else { continue };
                let gates = [
                    ("wavelength", e.wavelength.as_ref().map(|x| (x.rel, x.factor))),
                    ("energy", e.energy.as_ref().map(|x| (x.rel, x.factor))),
                    ("e0", e.e0.as_ref().map(|x| (x.rel, x.factor))),
                ];
                for (name, gate) in gates {
                    if let Some((rel, factor)) = gate {
                        if rel.is_some() == factor.is_some() {
                            return Err(schema(
                                format!("physics.rows[{i}].expect.{name}"),
                                "give exactly one of rel and factor",
                            ));
                        }
                    }
                }
            }
        }
        _ => {}
    }
    Ok(())
}

/// Parses and validates a configuration document without running it.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let input: Value = serde_json::from_str(text).map_err(|e| schema(".", e.to_string()))?;
    let raw: RawConfig = typed("", input.clone())?;
    let physics = physics_for(raw.scenario, raw.physics)?;
    check_grid(raw.scenario, &raw.grid)?;
    check_physics(&physics, raw.seed)?;
    let allowed = raw.scenario.outputs();
    for (i, o) in raw.outputs.iter().enumerate() {
        if !allowed.contains(o) {
            return Err(schema(format!("outputs[{i}]"), format!("{} has no {o:?} output", raw.scenario.as_str())));
        }
    }
    let known = raw.scenario.check_names();
    for (key, v) in &raw.tolerances {
        if !known.contains(&key.as_str()) {
            return Err(schema(format!("tolerances.{key}"), format!("no check named {key:?}")));
        }
        if !(v.is_finite() && *v > 0.0) {
            return Err(schema(format!("tolerances.{key}"), "tolerance must be positive"));
        }
    }
    let mut outputs = raw.outputs;
    outputs.sort();
    outputs.dedup();
    Ok(ScenarioConfig {
        scenario: raw.scenario,
        grid: raw.grid,
        physics,
        outputs,
        seed: raw.seed,
        tolerances: raw.tolerances,
        input,
    })
}
