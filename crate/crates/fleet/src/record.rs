//! Fleet record schema and CSV ingestion.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted model years.
pub const YEAR_RANGE: (i32, i32) = (2005, 2035);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Drivetrain {
    #[serde(rename = "FWD")]
    Fwd,
    #[serde(rename = "RWD")]
    Rwd,
    #[serde(rename = "AWD")]
    Awd,
}

impl FromStr for Drivetrain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "FWD" => Ok(Drivetrain::Fwd),
            "RWD" => Ok(Drivetrain::Rwd),
            "AWD" => Ok(Drivetrain::Awd),
            _ => Err(format!("unknown drivetrain '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InverterTech {
    #[serde(rename = "Si")]
    Si,
    #[serde(rename = "SiC")]
    SiC,
    #[serde(rename = "mixed")]
    Mixed,
    #[serde(rename = "unknown")]
    Unknown,
}

impl FromStr for InverterTech {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "si" => Ok(InverterTech::Si),
            "sic" => Ok(InverterTech::SiC),
            "mixed" => Ok(InverterTech::Mixed),
            "unknown" => Ok(InverterTech::Unknown),
            _ => Err(format!("unknown inverter technology '{s}'")),
        }
    }
}

/// Numeric attributes of a record, named as their CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    EntryYear,
    RangeKm,
    ConsumptionKwhPer100,
    BatteryKwh,
    MassKg,
    #[serde(rename = "accel_0_100_s")]
    Accel0100S,
    CostEur,
    MotorPowerKw,
    MotorTorqueNm,
    DcChargeKw,
    AcChargeKw,
    SysVoltageV,
    LengthM,
    WidthM,
    HeightM,
    Seats,
    PayloadKg,
    BootL,
    TowKg,
    WarrantyKm,
    OneStopKm,
}

impl Variable {
    pub const ALL: [Variable; 21] = [
        Variable::EntryYear,
        Variable::RangeKm,
        Variable::ConsumptionKwhPer100,
        Variable::BatteryKwh,
        Variable::MassKg,
        Variable::Accel0100S,
        Variable::CostEur,
        Variable::MotorPowerKw,
        Variable::MotorTorqueNm,
        Variable::DcChargeKw,
        Variable::AcChargeKw,
        Variable::SysVoltageV,
        Variable::LengthM,
        Variable::WidthM,
        Variable::HeightM,
        Variable::Seats,
        Variable::PayloadKg,
        Variable::BootL,
        Variable::TowKg,
        Variable::WarrantyKm,
        Variable::OneStopKm,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Variable::EntryYear => "entry_year",
            Variable::RangeKm => "range_km",
            Variable::ConsumptionKwhPer100 => "consumption_kwh_per100",
            Variable::BatteryKwh => "battery_kwh",
            Variable::MassKg => "mass_kg",
            Variable::Accel0100S => "accel_0_100_s",
            Variable::CostEur => "cost_eur",
            Variable::MotorPowerKw => "motor_power_kw",
            Variable::MotorTorqueNm => "motor_torque_nm",
            Variable::DcChargeKw => "dc_charge_kw",
            Variable::AcChargeKw => "ac_charge_kw",
            Variable::SysVoltageV => "sys_voltage_v",
            Variable::LengthM => "length_m",
            Variable::WidthM => "width_m",
            Variable::HeightM => "height_m",
            Variable::Seats => "seats",
            Variable::PayloadKg => "payload_kg",
            Variable::BootL => "boot_l",
            Variable::TowKg => "tow_kg",
            Variable::WarrantyKm => "warranty_km",
            Variable::OneStopKm => "one_stop_km",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variable::ALL
            .into_iter()
            .find(|v| v.column() == s.trim())
            .ok_or_else(|| Error::UnknownVariable(s.to_string()))
    }
}

/// One vehicle model. Range, battery capacity and inverter technology are
/// mandatory; every other attribute may be missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetRecord {
    pub model_id: String,
    pub entry_year: i32,
    pub range_km: f64,
    pub battery_kwh: f64,
    pub inverter_tech: InverterTech,
    pub drivetrain: Option<Drivetrain>,
    pub consumption_kwh_per100: Option<f64>,
    pub mass_kg: Option<f64>,
    pub accel_0_100_s: Option<f64>,
    pub cost_eur: Option<f64>,
    pub motor_power_kw: Option<f64>,
    pub motor_torque_nm: Option<f64>,
    pub dc_charge_kw: Option<f64>,
    pub ac_charge_kw: Option<f64>,
    pub sys_voltage_v: Option<f64>,
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
    pub height_m: Option<f64>,
    pub seats: Option<u32>,
    pub payload_kg: Option<f64>,
    pub boot_l: Option<f64>,
    pub tow_kg: Option<f64>,
    pub warranty_km: Option<f64>,
    pub one_stop_km: Option<f64>,
}

impl FleetRecord {
    pub fn value(&self, v: Variable) -> Option<f64> {
        match v {
            Variable::EntryYear => Some(self.entry_year as f64),
            Variable::RangeKm => Some(self.range_km),
            Variable::ConsumptionKwhPer100 => self.consumption_kwh_per100,
            Variable::BatteryKwh => Some(self.battery_kwh),
            Variable::MassKg => self.mass_kg,
            Variable::Accel0100S => self.accel_0_100_s,
            Variable::CostEur => self.cost_eur,
            Variable::MotorPowerKw => self.motor_power_kw,
            Variable::MotorTorqueNm => self.motor_torque_nm,
            Variable::DcChargeKw => self.dc_charge_kw,
            Variable::AcChargeKw => self.ac_charge_kw,
            Variable::SysVoltageV => self.sys_voltage_v,
            Variable::LengthM => self.length_m,
            Variable::WidthM => self.width_m,
            Variable::HeightM => self.height_m,
            Variable::Seats => self.seats.map(f64::from),
            Variable::PayloadKg => self.payload_kg,
            Variable::BootL => self.boot_l,
            Variable::TowKg => self.tow_kg,
            Variable::WarrantyKm => self.warranty_km,
            Variable::OneStopKm => self.one_stop_km,
        }
    }
}

/// A data row that did not become a record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    /// 1-based line in the file, header included.
    pub line: u64,
    pub model_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ingest {
    pub records: Vec<FleetRecord>,
    pub rejected: Vec<Rejection>,
}

pub const MANDATORY_MISSING: &str = "mandatory field missing";

pub fn ingest(path: &Path) -> Result<Ingest> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_reader(file, path)
}

/// Parses fleet CSV from any reader; `origin` only labels errors.
pub fn ingest_reader<R: Read>(reader: R, origin: &Path) -> Result<Ingest> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Header {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let columns: HashMap<String, usize> = header
        .iter()
        .enumerate()
        .map(|(i, name)| (name.to_string(), i))
        .collect();
    let mut out = Ingest::default();
    for row in rdr.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                log::warn!("{}: line {line}: {e}", origin.display());
                out.rejected.push(Rejection {
                    line,
                    model_id: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let cells = Cells {
            row: &row,
            columns: &columns,
        };
        match parse_record(&cells) {
            Ok(record) => out.records.push(record),
            Err(reason) => {
                let model_id = cells.text("model_id").map(str::to_string);
                log::warn!(
                    "{}: line {line} ({}): {reason}",
                    origin.display(),
                    model_id.as_deref().unwrap_or("?")
                );
                out.rejected.push(Rejection {
                    line,
                    model_id,
                    reason,
                });
            }
        }
    }
    Ok(out)
}

struct Cells<'a> {
    row: &'a csv::StringRecord,
    columns: &'a HashMap<String, usize>,
}

impl Cells<'_> {
    fn text(&self, name: &str) -> Option<&str> {
        let i = *self.columns.get(name)?;
        self.row
            .get(i)
            .filter(|s| !s.is_empty() && !s.eq_ignore_ascii_case("na"))
    }

    fn parsed<T: FromStr>(&self, name: &str) -> std::result::Result<Option<T>, String>
    where
        T::Err: fmt::Display,
    {
        self.text(name)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| format!("{name}: cannot parse '{s}': {e}"))
            })
            .transpose()
    }

    fn positive(&self, name: &str) -> std::result::Result<Option<f64>, String> {
        match self.parsed::<f64>(name)? {
            Some(x) if !(x.is_finite() && x > 0.0) => {
                Err(format!("{name}: {x} is not a positive number"))
            }
            v => Ok(v),
        }
    }
}

fn parse_record(c: &Cells) -> std::result::Result<FleetRecord, String> {
    let mandatory =
        |v: Option<f64>, name: &str| v.ok_or_else(|| format!("{MANDATORY_MISSING}: {name}"));
    let range_km = c.positive("range_km")?;
    let battery_kwh = c.positive("battery_kwh")?;
    let inverter_tech = c.parsed::<InverterTech>("inverter_tech")?;
    let record = FleetRecord {
        model_id: c.text("model_id").ok_or("model_id missing")?.to_string(),
        entry_year: {
            let y = c.parsed::<i32>("entry_year")?.ok_or("entry_year missing")?;
            if !(YEAR_RANGE.0..=YEAR_RANGE.1).contains(&y) {
                return Err(format!(
                    "entry_year {y} outside [{}, {}]",
                    YEAR_RANGE.0, YEAR_RANGE.1
                ));
            }
            y
        },
        range_km: mandatory(range_km, "range_km")?,
        battery_kwh: mandatory(battery_kwh, "battery_kwh")?,
        inverter_tech: inverter_tech
            .ok_or_else(|| format!("{MANDATORY_MISSING}: inverter_tech"))?,
        drivetrain: c.parsed("drivetrain")?,
        consumption_kwh_per100: c.positive("consumption_kwh_per100")?,
        mass_kg: c.positive("mass_kg")?,
        accel_0_100_s: c.positive("accel_0_100_s")?,
        cost_eur: c.positive("cost_eur")?,
        motor_power_kw: c.positive("motor_power_kw")?,
        motor_torque_nm: c.positive("motor_torque_nm")?,
        dc_charge_kw: c.positive("dc_charge_kw")?,
        ac_charge_kw: c.positive("ac_charge_kw")?,
        sys_voltage_v: c.positive("sys_voltage_v")?,
        length_m: c.positive("length_m")?,
        width_m: c.positive("width_m")?,
        height_m: c.positive("height_m")?,
        seats: match c.parsed::<u32>("seats")? {
            Some(0) => return Err("seats: 0 is not a positive number".into()),
            s => s,
        },
        payload_kg: c.positive("payload_kg")?,
        boot_l: c.positive("boot_l")?,
        tow_kg: c.positive("tow_kg")?,
        warranty_km: c.positive("warranty_km")?,
        one_stop_km: c.positive("one_stop_km")?,
    };
    Ok(record)
}
