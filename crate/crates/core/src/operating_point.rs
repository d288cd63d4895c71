use serde::{Deserialize, Serialize};

/// Upper end of the linear modulation range with min-max common-mode injection (2/√3).
pub const MAX_LINEAR_MODULATION: f64 = 1.154_700_538_379_251_5;

/// Fundamental-frequency electrical state of the inverter output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalState {
    /// Phase voltage amplitude relative to half the DC-link voltage.
    pub modulation_index: f64,
    /// Displacement factor cos φ; negative while generating.
    pub power_factor: f64,
    pub phase_current_peak: f64,
    pub fundamental_freq: f64,
}

impl ElectricalState {
    pub const IDLE: ElectricalState = ElectricalState {
        modulation_index: 0.0,
        power_factor: 1.0,
        phase_current_peak: 0.0,
        fundamental_freq: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        (0.0..=MAX_LINEAR_MODULATION + 1e-12).contains(&self.modulation_index)
            && self.power_factor.abs() <= 1.0 + 1e-12
            && self.phase_current_peak >= 0.0
            && self.fundamental_freq >= 0.0
    }

    /// Load angle φ between fundamental voltage and current.
    pub fn phase_angle(&self) -> f64 {
        self.power_factor.clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Mechanical shaft speed in rad/s.
    pub motor_speed: f64,
    /// Shaft torque in N·m; negative while braking.
    pub motor_torque: f64,
    pub electrical: ElectricalState,
    pub dc_voltage: f64,
}

impl OperatingPoint {
    pub fn mechanical_power(&self) -> f64 {
        self.motor_speed * self.motor_torque
    }

    /// Operating point with only the electrical quantities set, as used by the
    /// inverter loss models.
    pub fn electrical_only(
        modulation_index: f64,
        power_factor: f64,
        phase_current_peak: f64,
        fundamental_freq: f64,
        dc_voltage: f64,
    ) -> Self {
        OperatingPoint {
            motor_speed: 0.0,
            motor_torque: 0.0,
            electrical: ElectricalState {
                modulation_index,
                power_factor,
                phase_current_peak,
                fundamental_freq,
            },
            dc_voltage,
        }
    }
}
