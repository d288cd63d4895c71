//! Run configuration and device library.
//!
//! Relative paths in a config file are resolved against the directory that
//! contains it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use drivesim_core::cycle::VehicleParams;
use drivesim_core::economics::{DEFAULT_BATTERY_PRICE, DEFAULT_RANGES};
use drivesim_core::motor::{HarmonicModel, MotorModel, MotorParams, MotorRatings};
use drivesim_core::pipeline::SimulationSettings;
use drivesim_core::semiconductor::{SwitchDevice, ThermalPath};
use drivesim_core::sizing::SizingConstraints;
use drivesim_core::topology::{ModePolicy, Role, SwitchPosition, TopologyConfig, TopologyKind};
use drivesim_fleet::{FilterPolicy, Variable, DEFAULT_WINDOWS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorConfig {
    pub fundamental: PathBuf,
    pub harmonic_ref: PathBuf,
    pub op_solver: PathBuf,
    pub pole_pairs: u32,
    pub u_dc_ref: f64,
    pub ratings: MotorRatings,
    pub harmonic: HarmonicModel,
}

impl MotorConfig {
    pub fn params(&self) -> MotorParams {
        MotorParams {
            pole_pairs: self.pole_pairs,
            ratings: self.ratings,
            harmonic: self.harmonic,
            u_dc_ref: self.u_dc_ref,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizingMethod {
    /// Minimal feasible area for the configured constraints.
    Auto,
    /// Library devices unscaled.
    AsIs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sizing {
    Method(SizingMethod),
    /// Explicit area factor per role; roles not listed keep factor 1.
    Factors(BTreeMap<Role, f64>),
}

impl Default for Sizing {
    fn default() -> Self {
        Sizing::Method(SizingMethod::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    /// Library position used for the full-load roles.
    pub full_load: String,
    /// Library position used for the partial-load roles of multilevel kinds.
    #[serde(default)]
    pub partial_load: Option<String>,
    /// Defaults to the switching frequency of the constraints.
    #[serde(default)]
    pub f_sw: Option<f64>,
    pub dc_link_capacitance: f64,
    #[serde(default)]
    pub mode_policy: ModePolicy,
    #[serde(default)]
    pub sizing: Sizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    pub dataset: Option<PathBuf>,
    /// Variables of the correlation matrix; all numeric columns when absent.
    pub variables: Option<Vec<Variable>>,
    pub windows: Vec<(i32, i32)>,
    pub cohort_variables: Vec<Variable>,
    pub quartile_variables: Vec<Variable>,
    pub policy: FilterPolicy,
}

impl Default for FleetConfig {
    fn default() -> Self {
        FleetConfig {
            dataset: None,
            variables: None,
            windows: DEFAULT_WINDOWS.to_vec(),
            cohort_variables: vec![
                Variable::RangeKm,
                Variable::ConsumptionKwhPer100,
                Variable::MassKg,
                Variable::Accel0100S,
                Variable::OneStopKm,
                Variable::BatteryKwh,
                Variable::DcChargeKw,
                Variable::TowKg,
                Variable::BootL,
            ],
            quartile_variables: vec![
                Variable::MotorPowerKw,
                Variable::MotorTorqueNm,
                Variable::DcChargeKw,
                Variable::BatteryKwh,
            ],
            policy: FilterPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub vehicle: VehicleParams,
    pub cycle_path: PathBuf,
    pub motor: MotorConfig,
    pub device_library: PathBuf,
    pub topologies: Vec<TopologySpec>,
    #[serde(default)]
    pub constraints: SizingConstraints,
    #[serde(default = "default_battery_price")]
    pub battery_price: f64,
    #[serde(default = "default_ranges")]
    pub ranges: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed of Monte Carlo runs; recorded in every report.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fleet: Option<FleetConfig>,
}

fn default_battery_price() -> f64 {
    DEFAULT_BATTERY_PRICE
}

fn default_ranges() -> Vec<f64> {
    DEFAULT_RANGES.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that replace config scalars.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub battery_price: Option<f64>,
    pub ranges: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Overridden values as `name = value` pairs.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        if let Some(p) = &self.output_dir {
            out.insert("output_dir".into(), p.display().to_string());
        }
        if let Some(p) = self.battery_price {
            out.insert("battery_price".into(), p.to_string());
        }
        if let Some(r) = &self.ranges {
            let r: Vec<String> = r.iter().map(f64::to_string).collect();
            out.insert("ranges".into(), r.join(","));
        }
        if let Some(s) = self.seed {
            out.insert("seed".into(), s.to_string());
        }
        out
    }
}

/// A parsed config file with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub config: T,
    pub path: PathBuf,
    pub sha256: String,
    pub overrides: Overrides,
}

impl<T> Loaded<T> {
    pub fn base_dir(&self) -> &Path {
        self.path.parent().unwrap_or(Path::new(""))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir().join(p)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::config(path, e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

fn read_text(path: &Path) -> Result<(String, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::config(path, e.to_string()))?;
    let sha = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::config(path, "not valid UTF-8"))?;
    Ok((text, sha))
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>, overrides: Overrides) -> Result<Loaded<RunConfig>> {
        let loaded = Self::parse(path, overrides)?;
        loaded.validate()?;
        Ok(loaded)
    }

    /// Parses without checking that the referenced files exist.
    pub fn parse(path: impl AsRef<Path>, overrides: Overrides) -> Result<Loaded<RunConfig>> {
        let path = path.as_ref();
        let (text, sha256) = read_text(path)?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        config.apply(&overrides);
        Ok(Loaded {
            config,
            path: path.to_path_buf(),
            sha256,
            overrides,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.output_dir {
            self.output_dir = p.clone();
        }
        if let Some(p) = o.battery_price {
            self.battery_price = p;
        }
        if let Some(r) = &o.ranges {
            self.ranges = r.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            t_j_max: self.constraints.t_j_max,
            ripple_frac: self.constraints.ripple_frac,
            dc_voltage: self.constraints.u_dc,
            ..SimulationSettings::default()
        }
    }
}

impl Loaded<RunConfig> {
    /// Checks everything that does not require reading the referenced data.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        let fail = |m: String| Err(Error::config(&self.path, m));
        for (what, p) in self.input_files() {
            if !p.is_file() {
                return fail(format!("{what} file {} does not exist", p.display()));
            }
        }
        if c.topologies.is_empty() {
            return fail("no topologies configured".into());
        }
        let mut seen = Vec::new();
        for t in &c.topologies {
            if seen.contains(&t.kind) {
                return fail(format!("topology {} configured twice", t.kind));
            }
            seen.push(t.kind);
            let multilevel = !t.kind.partial_load_roles().is_empty();
            if multilevel != t.partial_load.is_some() {
                return fail(format!(
                    "{}: a partial-load position is {}",
                    t.kind,
                    if multilevel {
                        "required"
                    } else {
                        "not allowed"
                    }
                ));
            }
            if let Sizing::Factors(f) = &t.sizing {
                if let Some((r, v)) = f
                    .iter()
                    .find(|(r, v)| !t.kind.roles().contains(r) || !(**v > 0.0))
                {
                    return fail(format!("{}: invalid area factor {v} for role {r}", t.kind));
                }
            }
        }
        if !(c.battery_price > 0.0) {
            return fail(format!(
                "battery price must be positive, got {}",
                c.battery_price
            ));
        }
        if c.ranges.is_empty() || c.ranges.iter().any(|r| !(*r > 0.0)) {
            return fail(format!("ranges must be positive, got {:?}", c.ranges));
        }
        c.vehicle
            .validate()
            .map_err(|e| Error::config(&self.path, e.to_string()))?;
        c.constraints
            .validate()
            .map_err(|e| Error::config(&self.path, e.to_string()))?;
        c.motor
            .harmonic
            .validate()
            .map_err(|e| Error::config(&self.path, e.to_string()))?;
        Ok(())
    }

    /// Referenced input files by role, resolved.
    pub fn input_files(&self) -> Vec<(&'static str, PathBuf)> {
        let c = &self.config;
        vec![
            ("cycle", self.resolve(&c.cycle_path)),
            ("device library", self.resolve(&c.device_library)),
            ("fundamental loss map", self.resolve(&c.motor.fundamental)),
            (
                "harmonic reference map",
                self.resolve(&c.motor.harmonic_ref),
            ),
            ("operating-point map", self.resolve(&c.motor.op_solver)),
        ]
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve_output(&self.config.output_dir)
    }

    fn resolve_output(&self, p: &Path) -> PathBuf {
        if self.overrides.output_dir.is_some() {
            p.to_path_buf()
        } else {
            self.resolve(p)
        }
    }

    pub fn load_motor(&self) -> Result<MotorModel> {
        let m = &self.config.motor;
        Ok(MotorModel::load(
            &m.params(),
            self.resolve(&m.fundamental),
            self.resolve(&m.harmonic_ref),
            self.resolve(&m.op_solver),
        )?)
    }

    pub fn load_library(&self) -> Result<DeviceLibrary> {
        DeviceLibrary::load(self.resolve(&self.config.device_library))
    }

    pub fn load_cycle(&self) -> Result<drivesim_core::cycle::DriveCycle> {
        Ok(drivesim_core::cycle::load_cycle(
            self.resolve(&self.config.cycle_path),
        )?)
    }
}

/// The parts of a config file the fleet command reads.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct FleetRun {
    #[serde(default)]
    pub fleet: FleetConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl FleetRun {
    pub fn load(path: impl AsRef<Path>, overrides: Overrides) -> Result<Loaded<FleetRun>> {
        let path = path.as_ref();
        let (text, sha256) = read_text(path)?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        let pick = |k: &str| table.get(k).cloned().map(|v| (k.to_string(), v));
        let subset: toml::Table = ["fleet", "output_dir", "seed"]
            .iter()
            .filter_map(|k| pick(k))
            .collect();
        let mut config: FleetRun = subset
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(path, e.to_string()))?;
        config.apply(&overrides);
        Ok(Loaded {
            config,
            path: path.to_path_buf(),
            sha256,
            overrides,
        })
    }

    /// Defaults with no config file.
    pub fn standalone(overrides: Overrides) -> Loaded<FleetRun> {
        let mut config = FleetRun {
            output_dir: default_output_dir(),
            ..FleetRun::default()
        };
        config.apply(&overrides);
        Loaded {
            config,
            path: PathBuf::new(),
            sha256: String::new(),
            overrides,
        }
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.output_dir {
            self.output_dir = p.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }
}

impl Loaded<FleetRun> {
    pub fn output_dir(&self) -> PathBuf {
        if self.overrides.output_dir.is_some() {
            self.config.output_dir.clone()
        } else {
            self.resolve(&self.config.output_dir)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionSpec {
    pub transistor: String,
    pub diode: String,
    pub thermal: String,
}

/// Named devices, thermal paths and switch positions built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceLibrary {
    pub devices: BTreeMap<String, SwitchDevice>,
    pub thermal: BTreeMap<String, ThermalPath>,
    pub positions: BTreeMap<String, PositionSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLibrary {
    devices: BTreeMap<String, toml::Table>,
    thermal: BTreeMap<String, ThermalPath>,
    positions: BTreeMap<String, PositionSpec>,
}

impl DeviceLibrary {
    /// Device tables take their name from the key.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (text, _) = read_text(path)?;
        let raw: RawLibrary =
            toml::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        let mut devices = BTreeMap::new();
        for (name, mut table) in raw.devices {
            table
                .entry("name")
                .or_insert_with(|| toml::Value::String(name.clone()));
            let device: SwitchDevice = table
                .try_into()
                .map_err(|e: toml::de::Error| Error::config(path, format!("device {name}: {e}")))?;
            device
                .validate()
                .map_err(|e| Error::config(path, format!("device {name}: {e}")))?;
            devices.insert(name, device);
        }
        let lib = DeviceLibrary {
            devices,
            thermal: raw.thermal,
            positions: raw.positions,
        };
        for name in lib.positions.keys() {
            lib.position(name).map_err(|m| Error::config(path, m))?;
        }
        Ok(lib)
    }

    pub fn position(&self, name: &str) -> std::result::Result<SwitchPosition, String> {
        let missing = |what: &str, key: &str| format!("position {name}: unknown {what} '{key}'");
        let spec = self
            .positions
            .get(name)
            .ok_or_else(|| format!("unknown position '{name}'"))?;
        let transistor = self
            .devices
            .get(&spec.transistor)
            .ok_or_else(|| missing("device", &spec.transistor))?;
        let diode = self
            .devices
            .get(&spec.diode)
            .ok_or_else(|| missing("device", &spec.diode))?;
        let thermal = self
            .thermal
            .get(&spec.thermal)
            .ok_or_else(|| missing("thermal path", &spec.thermal))?;
        Ok(SwitchPosition {
            transistor: transistor.clone(),
            diode: diode.clone(),
            thermal: *thermal,
        })
    }

    /// The unscaled topology a spec describes.
    pub fn topology(
        &self,
        spec: &TopologySpec,
        constraints: &SizingConstraints,
    ) -> std::result::Result<TopologyConfig, String> {
        let full = self.position(&spec.full_load)?;
        let partial = spec
            .partial_load
            .as_deref()
            .map(|p| self.position(p))
            .transpose()?;
        let positions = spec
            .kind
            .roles()
            .iter()
            .map(|&r| {
                let pos = if spec.kind.full_load_roles().contains(&r) {
                    full.clone()
                } else {
                    partial.clone().ok_or_else(|| {
                        format!("{}: role {r} needs a partial-load position", spec.kind)
                    })?
                };
                Ok((r, pos))
            })
            .collect::<std::result::Result<_, String>>()?;
        let topo = TopologyConfig {
            kind: spec.kind,
            f_sw: spec.f_sw.unwrap_or(constraints.f_sw),
            positions,
            dc_link_capacitance: spec.dc_link_capacitance,
            mode_policy: spec.mode_policy,
        };
        topo.validate().map_err(|e| format!("{}: {e}", spec.kind))?;
        Ok(topo)
    }
}
