//! Inverter losses under SVPWM for two- and three-level operation.

mod analytic;
mod oracle;
mod ripple;

pub use analytic::{leg_stresses, ElementStress, LegStresses, SwitchStress};
pub use oracle::{oracle_losses, oracle_run, OracleRun};
pub use ripple::{dc_link_ripple, RippleEstimate, RIPPLE_FRACTION};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operating_point::OperatingPoint;
use crate::semiconductor::{solve_junction_temp, ElectroThermalSettings, SwitchDevice};
use crate::topology::{Element, Mode, Part, Role, TopologyConfig, TopologyKind};

pub const PHASES: [char; 3] = ['a', 'b', 'c'];

/// One semiconductor element of one phase leg, written `a.T1`, `c.D4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct DeviceKey {
    pub phase: u8,
    pub element: Element,
}

impl fmt::Display for DeviceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", PHASES[self.phase as usize], self.element)
    }
}

impl From<DeviceKey> for String {
    fn from(k: DeviceKey) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for DeviceKey {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        let bad = || format!("bad device key '{s}'");
        let (p, e) = s.split_once('.').ok_or_else(bad)?;
        let phase = PHASES
            .iter()
            .position(|c| p.len() == 1 && p.starts_with(*c))
            .ok_or_else(bad)? as u8;
        let part = match e.chars().next() {
            Some('T') => Part::Transistor,
            Some('D') => Part::Diode,
            _ => return Err(bad()),
        };
        let role = Role::try_from(format!("T{}", &e[1..]))?;
        Ok(DeviceKey {
            phase,
            element: Element { role, part },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeviceLoss {
    pub conduction: f64,
    pub switching: f64,
}

impl DeviceLoss {
    pub fn total(&self) -> f64 {
        self.conduction + self.switching
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub mode: Mode,
    pub per_device: BTreeMap<DeviceKey, DeviceLoss>,
    pub p_sw_inv: f64,
    pub p_cond_inv: f64,
}

impl LossBreakdown {
    pub fn from_devices(mode: Mode, per_device: BTreeMap<DeviceKey, DeviceLoss>) -> Self {
        let p_sw_inv = per_device.values().map(|d| d.switching).sum();
        let p_cond_inv = per_device.values().map(|d| d.conduction).sum();
        LossBreakdown {
            mode,
            per_device,
            p_sw_inv,
            p_cond_inv,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_sw_inv + self.p_cond_inv
    }

    pub fn device(&self, phase: u8, element: Element) -> DeviceLoss {
        self.per_device
            .get(&DeviceKey { phase, element })
            .copied()
            .unwrap_or_default()
    }

    /// Loss of one switch position (transistor plus diode) in one phase.
    pub fn position(&self, phase: u8, role: Role) -> f64 {
        [Part::Transistor, Part::Diode]
            .iter()
            .map(|&part| self.device(phase, Element { role, part }).total())
            .sum()
    }
}

/// Junction temperature of each role, or the device reference temperature.
#[derive(Debug, Clone, Copy)]
pub enum JunctionTemps<'a> {
    Reference,
    PerRole(&'a BTreeMap<Role, f64>),
}

impl JunctionTemps<'_> {
    fn of(&self, role: Role, device: &SwitchDevice) -> f64 {
        match self {
            JunctionTemps::Reference => device.t_ref,
            JunctionTemps::PerRole(map) => map.get(&role).copied().unwrap_or(device.t_ref),
        }
    }
}

fn element_loss(
    topo: &TopologyConfig,
    stresses: &LegStresses,
    element: Element,
    junction_temp: f64,
    u_dc: f64,
) -> DeviceLoss {
    let device = topo.device(element);
    let conduction = stresses
        .conduction
        .get(&element)
        .map(|s| {
            let (v0, r) = device.conduction_coefficients(junction_temp);
            v0 * s.a1 + r * s.a2
        })
        .unwrap_or(0.0);
    let switching = topo.f_sw
        * stresses
            .switching
            .iter()
            .filter(|s| s.element == element)
            .map(|s| device.switching_energy(s.event, s.mean_current, s.voltage_fraction * u_dc))
            .sum::<f64>();
    DeviceLoss {
        conduction,
        switching,
    }
}

/// Applies device data to per-leg stresses; all three legs carry the same
/// averaged stress.
pub fn losses_from_stresses(
    topo: &TopologyConfig,
    stresses: &LegStresses,
    temps: JunctionTemps<'_>,
    u_dc: f64,
) -> LossBreakdown {
    let mut per_device = BTreeMap::new();
    for &role in topo.kind.roles() {
        for part in [Part::Transistor, Part::Diode] {
            let element = Element { role, part };
            let t = temps.of(role, topo.device(element));
            let loss = element_loss(topo, stresses, element, t, u_dc);
            for phase in 0..3 {
                per_device.insert(DeviceKey { phase, element }, loss);
            }
        }
    }
    LossBreakdown::from_devices(stresses.mode, per_device)
}

/// Closed-form averaged losses with conduction evaluated at each device's
/// reference temperature.
pub fn analytic_losses(
    topo: &TopologyConfig,
    op: &OperatingPoint,
    mode: Mode,
) -> Result<LossBreakdown> {
    topo.ensure_mode(mode)?;
    let stresses = leg_stresses(topo.kind, mode, &op.electrical);
    Ok(losses_from_stresses(
        topo,
        &stresses,
        JunctionTemps::Reference,
        op.dc_voltage,
    ))
}

/// Losses at the electro-thermal fixed point of every switch position.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalLosses {
    pub losses: LossBreakdown,
    pub junction_temps: BTreeMap<Role, f64>,
}

impl ThermalLosses {
    pub fn max_junction_temp(&self, roles: &[Role]) -> f64 {
        roles
            .iter()
            .filter_map(|r| self.junction_temps.get(r))
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn thermal_losses(
    topo: &TopologyConfig,
    op: &OperatingPoint,
    mode: Mode,
    settings: &ElectroThermalSettings,
) -> Result<ThermalLosses> {
    topo.ensure_mode(mode)?;
    let stresses = leg_stresses(topo.kind, mode, &op.electrical);
    let mut junction_temps = BTreeMap::new();
    for &role in topo.kind.roles() {
        let position = topo.position(role);
        let loss_at = |t: f64| {
            [Part::Transistor, Part::Diode]
                .iter()
                .map(|&part| {
                    element_loss(topo, &stresses, Element { role, part }, t, op.dc_voltage).total()
                })
                .sum::<f64>()
        };
        let state = solve_junction_temp(&position.thermal, loss_at, settings).ok_or_else(|| {
            Error::ThermalRunaway {
                role: role.to_string(),
                temperature: f64::INFINITY,
            }
        })?;
        junction_temps.insert(role, state.junction_temp);
    }
    let losses = losses_from_stresses(
        topo,
        &stresses,
        JunctionTemps::PerRole(&junction_temps),
        op.dc_voltage,
    );
    Ok(ThermalLosses {
        losses,
        junction_temps,
    })
}

/// Picks the operating mode according to the topology's policy.
/// `drivetrain_loss` is only consulted under the minimum-loss policy.
pub fn select_mode(
    topo: &TopologyConfig,
    op: &OperatingPoint,
    feasible_3l: impl Fn(&OperatingPoint) -> bool,
    drivetrain_loss: impl Fn(Mode) -> f64,
) -> Mode {
    use crate::topology::ModePolicy;
    if !topo.kind.supports(Mode::ThreeLevel) {
        return Mode::TwoLevel;
    }
    match topo.mode_policy {
        ModePolicy::Always2L => Mode::TwoLevel,
        ModePolicy::Always3LWhenFeasible if feasible_3l(op) => Mode::ThreeLevel,
        ModePolicy::Always3LWhenFeasible => Mode::TwoLevel,
        ModePolicy::MinLoss => {
            if feasible_3l(op)
                && drivetrain_loss(Mode::ThreeLevel) < drivetrain_loss(Mode::TwoLevel)
            {
                Mode::ThreeLevel
            } else {
                Mode::TwoLevel
            }
        }
    }
}

/// Roles carrying current in `mode`.
pub fn active_roles(kind: TopologyKind, mode: Mode) -> &'static [Role] {
    match mode {
        Mode::TwoLevel => kind.full_load_roles(),
        Mode::ThreeLevel => kind.roles(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_key_round_trip() {
        let k = DeviceKey::try_from("b.D4".to_string()).unwrap();
        assert_eq!(k.phase, 1);
        assert_eq!(k.element.role, Role(4));
        assert_eq!(k.element.part, Part::Diode);
        assert_eq!(k.to_string(), "b.D4");
        assert!(DeviceKey::try_from("d.T1".to_string()).is_err());
        assert!(DeviceKey::try_from("a.X1".to_string()).is_err());
    }
}
