//! Inverter topologies, device roles and the per-leg conduction and
//! commutation tables shared by the analytic model and the switching oracle.
//!
//! Role numbering per phase leg:
//!
//! * B6: T1 upper, T2 lower.
//! * TNPC: T1 upper and T2 lower (full DC-link voltage), T3/T4 the
//!   back-to-back clamp pair to the neutral point. T3 carries positive
//!   (outgoing) current in the clamp path, T4 negative current.
//! * ANPC: T1 P-rail to upper node, T2 upper node to output, T3 output to
//!   lower node, T4 lower node to N-rail, T5 upper node to neutral, T6 neutral
//!   to lower node. T5/T6 are the partial-load clamp switches.
//!
//! Every role is a switch position made of a transistor and its antiparallel
//! diode (`D<n>`). For SiC positions the diode element is the reverse
//! conduction path of the MOSFET die.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiconductor::{SwitchDevice, SwitchEvent, ThermalPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TopologyKind {
    #[serde(rename = "B6_Si")]
    B6Si,
    #[serde(rename = "B6_SiC")]
    B6Sic,
    #[serde(rename = "TNPC_SiC")]
    TnpcSic,
    #[serde(rename = "ANPC_SiC")]
    AnpcSic,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::B6Si,
        TopologyKind::B6Sic,
        TopologyKind::TnpcSic,
        TopologyKind::AnpcSic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TopologyKind::B6Si => "B6_Si",
            TopologyKind::B6Sic => "B6_SiC",
            TopologyKind::TnpcSic => "TNPC_SiC",
            TopologyKind::AnpcSic => "ANPC_SiC",
        }
    }

    pub fn roles(self) -> &'static [Role] {
        match self {
            TopologyKind::B6Si | TopologyKind::B6Sic => &[Role(1), Role(2)],
            TopologyKind::TnpcSic => &[Role(1), Role(2), Role(3), Role(4)],
            TopologyKind::AnpcSic => &[Role(1), Role(2), Role(3), Role(4), Role(5), Role(6)],
        }
    }

    /// Roles that carry current in two-level operation and set the peak rating.
    pub fn full_load_roles(self) -> &'static [Role] {
        match self {
            TopologyKind::B6Si | TopologyKind::B6Sic | TopologyKind::TnpcSic => &[Role(1), Role(2)],
            TopologyKind::AnpcSic => &[Role(1), Role(2), Role(3), Role(4)],
        }
    }

    /// Roles used only in three-level operation.
    pub fn partial_load_roles(self) -> &'static [Role] {
        match self {
            TopologyKind::B6Si | TopologyKind::B6Sic => &[],
            TopologyKind::TnpcSic => &[Role(3), Role(4)],
            TopologyKind::AnpcSic => &[Role(5), Role(6)],
        }
    }

    pub fn supports(self, mode: Mode) -> bool {
        match mode {
            Mode::TwoLevel => true,
            Mode::ThreeLevel => matches!(self, TopologyKind::TnpcSic | TopologyKind::AnpcSic),
        }
    }

    pub fn modes(self) -> &'static [Mode] {
        if self.supports(Mode::ThreeLevel) {
            &[Mode::TwoLevel, Mode::ThreeLevel]
        } else {
            &[Mode::TwoLevel]
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "2L")]
    TwoLevel,
    #[serde(rename = "3L")]
    ThreeLevel,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::TwoLevel => "2L",
            Mode::ThreeLevel => "3L",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Role(pub u8);

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

impl TryFrom<String> for Role {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.strip_prefix('T')
            .and_then(|n| n.parse::<u8>().ok())
            .filter(|n| (1..=6).contains(n))
            .map(Role)
            .ok_or_else(|| format!("unknown role '{s}'"))
    }
}

impl From<Role> for String {
    fn from(r: Role) -> String {
        r.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    Transistor,
    Diode,
}

/// A single semiconductor element of a leg: the transistor or the
/// antiparallel path of a role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub role: Role,
    pub part: Part,
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.part {
            Part::Transistor => 'T',
            Part::Diode => 'D',
        };
        write!(f, "{p}{}", self.role.0)
    }
}

const fn t(n: u8) -> Element {
    Element {
        role: Role(n),
        part: Part::Transistor,
    }
}

const fn d(n: u8) -> Element {
    Element {
        role: Role(n),
        part: Part::Diode,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LegState {
    P,
    O,
    N,
}

/// Sign of the phase reference; selects the active clamp path in ANPC legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfWave {
    Positive,
    Negative,
}

/// One switching event caused by a leg state change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commutation {
    pub element: Element,
    pub event: SwitchEvent,
    /// Commutated voltage as a fraction of the DC-link voltage.
    pub voltage_fraction: f64,
}

const fn on(e: Element, v: f64) -> Commutation {
    Commutation {
        element: e,
        event: SwitchEvent::On,
        voltage_fraction: v,
    }
}

const fn off(e: Element, v: f64) -> Commutation {
    Commutation {
        element: e,
        event: SwitchEvent::Off,
        voltage_fraction: v,
    }
}

const fn rr(e: Element, v: f64) -> Commutation {
    Commutation {
        element: e,
        event: SwitchEvent::Recovery,
        voltage_fraction: v,
    }
}

/// Elements carrying the phase current in `state`. `current_positive` means
/// current flowing out of the leg into the machine.
pub fn conduction_path(
    kind: TopologyKind,
    mode: Mode,
    state: LegState,
    half: HalfWave,
    current_positive: bool,
) -> &'static [Element] {
    use LegState::*;
    let anpc = kind == TopologyKind::AnpcSic;
    match (anpc, mode, state, current_positive) {
        (false, _, P, true) => &const { [t(1)] },
        (false, _, P, false) => &const { [d(1)] },
        (false, _, N, true) => &const { [d(2)] },
        (false, _, N, false) => &const { [t(2)] },
        (false, Mode::ThreeLevel, O, true) => &const { [t(3), d(4)] },
        (false, Mode::ThreeLevel, O, false) => &const { [t(4), d(3)] },
        (true, _, P, true) => &const { [t(1), t(2)] },
        (true, _, P, false) => &const { [d(1), d(2)] },
        (true, _, N, true) => &const { [d(4), d(3)] },
        (true, _, N, false) => &const { [t(3), t(4)] },
        (true, Mode::ThreeLevel, O, true) => match half {
            HalfWave::Positive => &const { [t(6), d(3)] },
            HalfWave::Negative => &const { [d(5), t(2)] },
        },
        (true, Mode::ThreeLevel, O, false) => match half {
            HalfWave::Positive => &const { [t(3), d(6)] },
            HalfWave::Negative => &const { [d(2), t(5)] },
        },
        (_, Mode::TwoLevel, O, _) => &[],
    }
}

/// Switching events for a leg transition `from → to`.
///
/// Two-level transitions are P↔N; three-level transitions always pass through
/// O. Unsupported transitions yield no events.
pub fn commutations(
    kind: TopologyKind,
    mode: Mode,
    from: LegState,
    to: LegState,
    half: HalfWave,
    current_positive: bool,
) -> &'static [Commutation] {
    use LegState::*;
    match (kind, mode) {
        (TopologyKind::AnpcSic, Mode::TwoLevel) => match (from, to, current_positive) {
            (P, N, true) => &const { [off(t(1), 0.5), off(t(2), 0.5)] },
            (P, N, false) => {
                &const { [on(t(3), 0.5), on(t(4), 0.5), rr(d(1), 0.5), rr(d(2), 0.5)] }
            }
            (N, P, true) => &const { [on(t(1), 0.5), on(t(2), 0.5), rr(d(3), 0.5), rr(d(4), 0.5)] },
            (N, P, false) => &const { [off(t(3), 0.5), off(t(4), 0.5)] },
            _ => &[],
        },
        (_, Mode::TwoLevel) => match (from, to, current_positive) {
            (P, N, true) => &const { [off(t(1), 1.0)] },
            (P, N, false) => &const { [on(t(2), 1.0), rr(d(1), 1.0)] },
            (N, P, true) => &const { [on(t(1), 1.0), rr(d(2), 1.0)] },
            (N, P, false) => &const { [off(t(2), 1.0)] },
            _ => &[],
        },
        (TopologyKind::TnpcSic, Mode::ThreeLevel) => match (from, to, current_positive) {
            (P, O, true) => &const { [off(t(1), 0.5)] },
            (P, O, false) => &const { [on(t(4), 0.5), rr(d(1), 0.5)] },
            (O, P, true) => &const { [on(t(1), 0.5), rr(d(4), 0.5)] },
            (O, P, false) => &const { [off(t(4), 0.5)] },
            (N, O, false) => &const { [off(t(2), 0.5)] },
            (N, O, true) => &const { [on(t(3), 0.5), rr(d(2), 0.5)] },
            (O, N, false) => &const { [on(t(2), 0.5), rr(d(3), 0.5)] },
            (O, N, true) => &const { [off(t(3), 0.5)] },
            _ => &[],
        },
        (TopologyKind::AnpcSic, Mode::ThreeLevel) => match (half, from, to, current_positive) {
            (HalfWave::Positive, P, O, true) => &const { [off(t(2), 0.5)] },
            (HalfWave::Positive, P, O, false) => &const { [on(t(3), 0.5), rr(d(2), 0.5)] },
            (HalfWave::Positive, O, P, true) => &const { [on(t(2), 0.5), rr(d(3), 0.5)] },
            (HalfWave::Positive, O, P, false) => &const { [off(t(3), 0.5)] },
            (HalfWave::Negative, N, O, false) => &const { [off(t(3), 0.5)] },
            (HalfWave::Negative, N, O, true) => &const { [on(t(2), 0.5), rr(d(3), 0.5)] },
            (HalfWave::Negative, O, N, false) => &const { [on(t(3), 0.5), rr(d(2), 0.5)] },
            (HalfWave::Negative, O, N, true) => &const { [off(t(2), 0.5)] },
            _ => &[],
        },
        (_, Mode::ThreeLevel) => &[],
    }
}

/// A transistor with its antiparallel diode sharing one thermal path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchPosition {
    pub transistor: SwitchDevice,
    pub diode: SwitchDevice,
    pub thermal: ThermalPath,
}

impl SwitchPosition {
    pub fn device(&self, part: Part) -> &SwitchDevice {
        match part {
            Part::Transistor => &self.transistor,
            Part::Diode => &self.diode,
        }
    }

    /// Die area of the position; a body diode shares the transistor die.
    pub fn chip_area(&self) -> f64 {
        match self.diode.kind {
            crate::semiconductor::DeviceKind::SicBodyDiode => self.transistor.chip_area,
            _ => self.transistor.chip_area + self.diode.chip_area,
        }
    }

    pub fn scale_area(&self, factor: f64) -> Result<SwitchPosition> {
        Ok(SwitchPosition {
            transistor: self.transistor.scale_area(factor)?,
            diode: self.diode.scale_area(factor)?,
            thermal: self.thermal.scale_area(factor)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.transistor.validate()?;
        self.diode.validate()?;
        self.thermal.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ModePolicy {
    #[serde(rename = "always2L")]
    Always2L,
    #[serde(rename = "always3L_when_feasible")]
    Always3LWhenFeasible,
    #[default]
    #[serde(rename = "min_loss")]
    MinLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    pub f_sw: f64,
    pub positions: BTreeMap<Role, SwitchPosition>,
    pub dc_link_capacitance: f64,
    pub mode_policy: ModePolicy,
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_sw > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: switching frequency must be positive",
                self.kind
            )));
        }
        if !(self.dc_link_capacitance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: DC-link capacitance must be positive",
                self.kind
            )));
        }
        let expected = self.kind.roles();
        if self.positions.len() != expected.len()
            || !expected.iter().all(|r| self.positions.contains_key(r))
        {
            return Err(Error::InvalidParameter(format!(
                "{}: expected roles {:?}, found {:?}",
                self.kind,
                expected.iter().map(Role::to_string).collect::<Vec<_>>(),
                self.positions
                    .keys()
                    .map(Role::to_string)
                    .collect::<Vec<_>>()
            )));
        }
        self.positions
            .values()
            .try_for_each(SwitchPosition::validate)
    }

    pub fn position(&self, role: Role) -> &SwitchPosition {
        &self.positions[&role]
    }

    pub fn device(&self, element: Element) -> &SwitchDevice {
        self.positions[&element.role].device(element.part)
    }

    /// Total die area of all three phase legs.
    pub fn total_chip_area(&self) -> f64 {
        3.0 * self
            .positions
            .values()
            .map(SwitchPosition::chip_area)
            .sum::<f64>()
    }

    pub fn partial_load_chip_area(&self) -> f64 {
        3.0 * self
            .kind
            .partial_load_roles()
            .iter()
            .map(|r| self.positions[r].chip_area())
            .fold(0.0, |a, x| a + x)
    }

    pub fn ensure_mode(&self, mode: Mode) -> Result<()> {
        if self.kind.supports(mode) {
            Ok(())
        } else {
            Err(Error::InfeasibleMode {
                topology: self.kind.to_string(),
                mode: mode.to_string(),
            })
        }
    }

    /// Copy with the given roles scaled by `factor`.
    pub fn with_scaled_roles(&self, roles: &[Role], factor: f64) -> Result<TopologyConfig> {
        let mut out = self.clone();
        for role in roles {
            let pos = out
                .positions
                .get_mut(role)
                .ok_or_else(|| Error::InvalidParameter(format!("{}: no role {role}", self.kind)))?;
            *pos = pos.scale_area(factor)?;
        }
        Ok(out)
    }
}
