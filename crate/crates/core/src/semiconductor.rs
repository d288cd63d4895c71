//! Datasheet-level switch and diode models, chip-area scaling and steady-state
//! junction temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceKind {
    #[serde(rename = "SiC-MOSFET")]
    SicMosfet,
    #[serde(rename = "Si-IGBT")]
    SiIgbt,
    #[serde(rename = "Si-diode")]
    SiDiode,
    #[serde(rename = "SiC-body-diode")]
    SicBodyDiode,
}

impl DeviceKind {
    pub fn is_diode(self) -> bool {
        matches!(self, DeviceKind::SiDiode | DeviceKind::SicBodyDiode)
    }
}

/// On-state model: a pure channel resistance or a knee voltage plus slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ConductionModel {
    Resistive { r_on: f64 },
    Threshold { v0: f64, r_slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchEvent {
    On,
    Off,
    Recovery,
}

fn default_voltage_exponent() -> f64 {
    1.3
}

fn default_reference_temp() -> f64 {
    25.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDevice {
    pub name: String,
    pub kind: DeviceKind,
    pub blocking_voltage: f64,
    pub conduction: ConductionModel,
    /// Temperature of the conduction parameters, °C.
    #[serde(default = "default_reference_temp")]
    pub t_ref: f64,
    /// Relative resistance change per kelvin.
    pub temp_coeff_r: f64,
    pub e_on: f64,
    pub e_off: f64,
    pub e_rr: f64,
    /// Current at which the switching energies were measured.
    pub i_ref: f64,
    /// Voltage at which the switching energies were measured.
    pub u_ref: f64,
    /// Exponent of the voltage dependence of the switching energies.
    #[serde(default = "default_voltage_exponent")]
    pub voltage_exponent: f64,
    /// Die area in a unit shared by all devices that are compared.
    #[serde(default = "one")]
    pub chip_area: f64,
}

fn one() -> f64 {
    1.0
}

impl SwitchDevice {
    pub fn validate(&self) -> Result<()> {
        let conduction_ok = match self.conduction {
            ConductionModel::Resistive { r_on } => r_on > 0.0,
            ConductionModel::Threshold { v0, r_slope } => v0 >= 0.0 && r_slope >= 0.0,
        };
        let ok = conduction_ok
            && self.e_on >= 0.0
            && self.e_off >= 0.0
            && self.e_rr >= 0.0
            && self.i_ref > 0.0
            && self.u_ref > 0.0
            && self.voltage_exponent >= 0.0
            && self.chip_area > 0.0
            && self.blocking_voltage > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "device '{}' has out-of-range parameters",
                self.name
            )))
        }
    }

    /// Equivalent device with `factor` times the die area.
    ///
    /// Resistances shrink as 1/area; per-event switching energies are kept at
    /// equal total current.
    pub fn scale_area(&self, factor: f64) -> Result<SwitchDevice> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!(
                "area factor must be positive, got {factor}"
            )));
        }
        let conduction = match self.conduction {
            ConductionModel::Resistive { r_on } => ConductionModel::Resistive {
                r_on: r_on / factor,
            },
            ConductionModel::Threshold { v0, r_slope } => ConductionModel::Threshold {
                v0,
                r_slope: r_slope / factor,
            },
        };
        Ok(SwitchDevice {
            conduction,
            chip_area: self.chip_area * factor,
            ..self.clone()
        })
    }

    /// Knee voltage and temperature-adjusted slope resistance at `junction_temp`.
    pub fn conduction_coefficients(&self, junction_temp: f64) -> (f64, f64) {
        let thermal = 1.0 + self.temp_coeff_r * (junction_temp - self.t_ref);
        match self.conduction {
            ConductionModel::Resistive { r_on } => (0.0, r_on * thermal),
            ConductionModel::Threshold { v0, r_slope } => (v0, r_slope * thermal),
        }
    }

    /// Forward voltage drop at a conducted current (A, non-negative).
    pub fn conduction_voltage(&self, current: f64, junction_temp: f64) -> f64 {
        let (v0, r) = self.conduction_coefficients(junction_temp);
        match self.conduction {
            ConductionModel::Resistive { .. } => r * current,
            ConductionModel::Threshold { .. } => v0 + r * current,
        }
    }

    /// Instantaneous conduction loss `V·I`.
    pub fn conduction_loss(&self, current: f64, junction_temp: f64) -> f64 {
        if current <= 0.0 {
            return 0.0;
        }
        self.conduction_voltage(current, junction_temp) * current
    }

    pub fn reference_energy(&self, event: SwitchEvent) -> f64 {
        match event {
            SwitchEvent::On => self.e_on,
            SwitchEvent::Off => self.e_off,
            SwitchEvent::Recovery => self.e_rr,
        }
    }

    /// Energy of one switching event, linear in current and following
    /// `(U/U_ref)^k` in voltage.
    pub fn switching_energy(&self, event: SwitchEvent, current: f64, voltage: f64) -> f64 {
        if current <= 0.0 || voltage <= 0.0 {
            return 0.0;
        }
        self.reference_energy(event)
            * (current / self.i_ref)
            * (voltage / self.u_ref).powf(self.voltage_exponent)
    }
}

/// Steady-state junction-to-coolant thermal path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPath {
    pub r_th_junction_case: f64,
    pub r_th_case_coolant: f64,
    pub coolant_temp: f64,
}

impl ThermalPath {
    pub fn validate(&self) -> Result<()> {
        if self.r_th_junction_case > 0.0 && self.r_th_case_coolant > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "thermal resistances must be positive".into(),
            ))
        }
    }

    pub fn total_resistance(&self) -> f64 {
        self.r_th_junction_case + self.r_th_case_coolant
    }

    /// Junction-to-case resistance shrinks with die area; the case-to-coolant
    /// part belongs to the cooler and is unchanged.
    pub fn scale_area(&self, factor: f64) -> Result<ThermalPath> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!(
                "area factor must be positive, got {factor}"
            )));
        }
        Ok(ThermalPath {
            r_th_junction_case: self.r_th_junction_case / factor,
            ..*self
        })
    }

    pub fn junction_temp(&self, device_loss: f64) -> f64 {
        self.coolant_temp + device_loss * self.total_resistance()
    }
}

/// Damped fixed-point settings for the electro-thermal loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectroThermalSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    /// Temperatures beyond this are treated as runaway.
    pub runaway_limit: f64,
}

impl Default for ElectroThermalSettings {
    fn default() -> Self {
        ElectroThermalSettings {
            tolerance: 0.1,
            max_iterations: 50,
            damping: 0.8,
            runaway_limit: 1000.0,
        }
    }
}

/// Converged electro-thermal state of one device position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub junction_temp: f64,
    pub loss: f64,
    pub iterations: usize,
}

/// Solves `T = T_coolant + R_th·P(T)` by damped iteration.
///
/// Returns `None` when the iteration runs away or fails to settle within the
/// iteration budget.
pub fn solve_junction_temp(
    path: &ThermalPath,
    loss_at: impl Fn(f64) -> f64,
    settings: &ElectroThermalSettings,
) -> Option<ThermalState> {
    let mut temp = path.coolant_temp;
    for iteration in 1..=settings.max_iterations {
        let target = path.junction_temp(loss_at(temp));
        if !target.is_finite() || target > settings.runaway_limit {
            return None;
        }
        let step = target - temp;
        temp += settings.damping * step;
        if step.abs() < settings.tolerance {
            return Some(ThermalState {
                junction_temp: temp,
                loss: loss_at(temp),
                iterations: iteration,
            });
        }
    }
    None
}
