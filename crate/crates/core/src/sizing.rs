//! Minimal chip-area sizing of full-load and partial-load switch positions.
//!
//! Areas are searched on a geometric grid `AREA_MIN · AREA_STEP^k` clamped to
//! `AREA_MAX`. Feasibility is monotone in area, so bisection over the grid
//! index returns exactly the smallest feasible grid point.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverter::{dc_link_ripple, thermal_losses};
use crate::motor::MotorModel;
use crate::operating_point::{OperatingPoint, MAX_LINEAR_MODULATION};
use crate::semiconductor::ElectroThermalSettings;
use crate::topology::{Mode, Role, TopologyConfig, TopologyKind};

pub const AREA_MIN: f64 = 0.1;
pub const AREA_MAX: f64 = 10.0;
/// Relative spacing of neighbouring grid areas.
pub const AREA_STEP: f64 = 1.005;

/// Electro-thermal settings used while sizing. The fixed point is solved far
/// tighter than in cycle simulation so that feasibility stays monotone in
/// area down to the grid spacing.
pub const SIZING_THERMAL: ElectroThermalSettings = ElectroThermalSettings {
    tolerance: 1e-7,
    max_iterations: 500,
    damping: 0.8,
    runaway_limit: 1000.0,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SizingConstraints {
    pub t_j_max: f64,
    pub ripple_frac: f64,
    /// Share of the available torque at the design speed.
    pub torque_frac: f64,
    /// Design speed relative to the maximum motor speed.
    pub speed_frac: f64,
    pub f_sw: f64,
    pub u_dc: f64,
}

impl Default for SizingConstraints {
    fn default() -> Self {
        SizingConstraints {
            t_j_max: 175.0,
            ripple_frac: 0.05,
            torque_frac: 0.80,
            speed_frac: 2.0 / 3.0,
            f_sw: 10e3,
            u_dc: 800.0,
        }
    }
}

impl SizingConstraints {
    pub fn validate(&self) -> Result<()> {
        let fractions = [self.ripple_frac, self.torque_frac, self.speed_frac];
        if !(self.t_j_max > 0.0 && self.f_sw > 0.0 && self.u_dc > 0.0)
            || fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0))
        {
            return Err(Error::InvalidParameter(format!(
                "sizing constraints out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Thermal,
    Ripple,
    Capability,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Thermal => "thermal",
            Constraint::Ripple => "ripple",
            Constraint::Capability => "capability",
        })
    }
}

/// Outcome of one feasibility evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub violated: Option<Constraint>,
    /// Limit minus hottest junction, K; negative infinity on runaway.
    pub thermal_margin: f64,
    /// Ripple limit minus peak ripple, V.
    pub ripple_margin: f64,
    /// Linear modulation headroom.
    pub capability_margin: f64,
}

impl Check {
    pub fn feasible(&self) -> bool {
        self.violated.is_none()
    }
}

/// Area at grid index `k`.
pub fn grid_area(k: usize) -> f64 {
    (AREA_MIN * AREA_STEP.powi(k as i32)).min(AREA_MAX)
}

/// Index of the last grid point (the one clamped to `AREA_MAX`).
pub fn grid_len() -> usize {
    ((AREA_MAX / AREA_MIN).ln() / AREA_STEP.ln()).ceil() as usize + 1
}

/// Smallest grid area for which `check` passes, with the constraint violated
/// one grid step below it (`None` when the lower bound already passes).
/// Fails with the violated constraint at the upper bound when nothing passes.
pub fn min_feasible_area(
    mut check: impl FnMut(f64) -> Result<Check>,
) -> Result<(f64, Option<Constraint>)> {
    let mut below = match check(AREA_MIN)?.violated {
        None => return Ok((AREA_MIN, None)),
        Some(c) => c,
    };
    let last = grid_len() - 1;
    let top = check(grid_area(last))?;
    if let Some(c) = top.violated {
        return Err(Error::SizingInfeasible {
            target: "area search".into(),
            constraint: c.to_string(),
        });
    }
    let (mut lo, mut hi) = (0usize, last);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match check(grid_area(mid))?.violated {
            None => hi = mid,
            Some(c) => {
                lo = mid;
                below = c;
            }
        }
    }
    Ok((grid_area(hi), Some(below)))
}

fn labelled(e: Error, target: String) -> Error {
    match e {
        Error::SizingInfeasible { constraint, .. } => {
            Error::SizingInfeasible { target, constraint }
        }
        other => other,
    }
}

/// Rated corner of the machine: maximum torque at base speed.
pub fn rated_operating_point(motor: &MotorModel, u_dc: f64) -> Result<OperatingPoint> {
    let r = &motor.ratings;
    let speed = r.max_power / r.max_torque;
    let torque = motor.torque_limit(speed);
    operating_point(motor, speed, torque, u_dc)
}

/// Partial-load design point: a share of the available torque at a share of
/// the maximum speed.
pub fn design_operating_point(
    motor: &MotorModel,
    constraints: &SizingConstraints,
) -> Result<OperatingPoint> {
    let speed = constraints.speed_frac * motor.ratings.max_speed;
    let torque = constraints.torque_frac * motor.torque_limit(speed);
    operating_point(motor, speed, torque, constraints.u_dc)
}

fn operating_point(
    motor: &MotorModel,
    speed: f64,
    torque: f64,
    u_dc: f64,
) -> Result<OperatingPoint> {
    Ok(OperatingPoint {
        motor_speed: speed,
        motor_torque: torque,
        electrical: motor.solve_electrical_state(speed, torque, u_dc)?,
        dc_voltage: u_dc,
    })
}

/// Junction limit minus the hottest junction; an unbounded limit is never
/// violated, not even by runaway.
fn thermal_margin(
    constraints: &SizingConstraints,
    hottest: impl FnOnce() -> Result<f64>,
) -> Result<f64> {
    if constraints.t_j_max == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    match hottest() {
        Ok(t) => Ok(constraints.t_j_max - t),
        Err(Error::ThermalRunaway { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Thermal feasibility of one full-load role scaled by `factor` in 2L mode.
/// The other full-load roles are scaled alike so that a runaway elsewhere in
/// the leg cannot mask the role under test; every role has its own thermal
/// path, so its junction temperature does not depend on them.
pub fn full_load_check(
    topo: &TopologyConfig,
    role: Role,
    factor: f64,
    peak_op: &OperatingPoint,
    constraints: &SizingConstraints,
) -> Result<Check> {
    let scaled = topo.with_scaled_roles(topo.kind.full_load_roles(), factor)?;
    let thermal_margin = thermal_margin(constraints, || {
        thermal_losses(&scaled, peak_op, Mode::TwoLevel, &SIZING_THERMAL)
            .map(|t| t.junction_temps[&role])
    })?;
    Ok(Check {
        violated: (thermal_margin < 0.0).then_some(Constraint::Thermal),
        thermal_margin,
        ripple_margin: f64::INFINITY,
        capability_margin: MAX_LINEAR_MODULATION - peak_op.electrical.modulation_index,
    })
}

/// Feasibility of the 3L design point with the partial-load roles scaled by
/// `factor`.
pub fn partial_load_check(
    topo: &TopologyConfig,
    factor: f64,
    design_op: &OperatingPoint,
    constraints: &SizingConstraints,
) -> Result<Check> {
    let scaled = topo.with_scaled_roles(topo.kind.partial_load_roles(), factor)?;
    let capability_margin = MAX_LINEAR_MODULATION - design_op.electrical.modulation_index;
    let ripple = dc_link_ripple(&scaled, design_op, Mode::ThreeLevel)?;
    let ripple_limit = constraints.ripple_frac * design_op.dc_voltage;
    let ripple_margin = ripple_limit - ripple.delta_u;
    let thermal_margin = thermal_margin(constraints, || {
        thermal_losses(&scaled, design_op, Mode::ThreeLevel, &SIZING_THERMAL)
            .map(|t| t.max_junction_temp(topo.kind.roles()))
    })?;
    let violated = if capability_margin < 0.0 {
        Some(Constraint::Capability)
    } else if ripple_margin < 0.0 {
        Some(Constraint::Ripple)
    } else if thermal_margin < 0.0 {
        Some(Constraint::Thermal)
    } else {
        None
    };
    Ok(Check {
        violated,
        thermal_margin,
        ripple_margin,
        capability_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullLoadSizing {
    /// Area factor per full-load role relative to the configured device.
    pub factors: BTreeMap<Role, f64>,
    pub binding_constraint: Option<Constraint>,
    pub topology: TopologyConfig,
}

/// Sizes every full-load role independently for the junction limit at the
/// peak operating point in 2L mode.
pub fn size_full_load(
    topo: &TopologyConfig,
    peak_op: &OperatingPoint,
    constraints: &SizingConstraints,
) -> Result<FullLoadSizing> {
    constraints.validate()?;
    topo.validate()?;
    let mut factors = BTreeMap::new();
    let mut binding = None;
    let mut sized = topo.clone();
    for &role in topo.kind.full_load_roles() {
        let (factor, bound) =
            min_feasible_area(|a| full_load_check(topo, role, a, peak_op, constraints))
                .map_err(|e| labelled(e, format!("{} {role}", topo.kind)))?;
        binding = binding.or(bound);
        factors.insert(role, factor);
        sized = sized.with_scaled_roles(&[role], factor)?;
    }
    Ok(FullLoadSizing {
        factors,
        binding_constraint: binding,
        topology: sized,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub thermal_k: f64,
    pub ripple_v: f64,
    pub modulation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingResult {
    pub topology: TopologyKind,
    /// Chip area per switch position (one phase leg), in the device area unit.
    pub per_role_area: BTreeMap<Role, f64>,
    /// Area factor applied to the partial-load roles.
    pub partial_load_factor: f64,
    /// Total bridge area relative to the reference bridge, minus one.
    pub total_area_delta: f64,
    /// Partial-load die area relative to the reference bridge.
    pub added_area_delta: f64,
    pub binding_constraint: Option<Constraint>,
    pub design_op: OperatingPoint,
    pub margins: Margins,
}

/// Sizes the partial-load roles of a multilevel topology whose full-load
/// roles are already sized. `reference_area` is the total bridge area of the
/// sized two-level reference.
pub fn size_partial_load(
    topo: &TopologyConfig,
    motor: &MotorModel,
    constraints: &SizingConstraints,
    reference_area: f64,
) -> Result<SizingResult> {
    constraints.validate()?;
    topo.validate()?;
    if !topo.kind.supports(Mode::ThreeLevel) {
        return Err(Error::InfeasibleMode {
            topology: topo.kind.to_string(),
            mode: Mode::ThreeLevel.to_string(),
        });
    }
    if !(reference_area > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference area must be positive, got {reference_area}"
        )));
    }
    let design_op = design_operating_point(motor, constraints)?;
    let (factor, bound) =
        min_feasible_area(|a| partial_load_check(topo, a, &design_op, constraints))
            .map_err(|e| labelled(e, format!("{} partial-load roles", topo.kind)))?;
    let sized = topo.with_scaled_roles(topo.kind.partial_load_roles(), factor)?;
    let check = partial_load_check(topo, factor, &design_op, constraints)?;
    Ok(SizingResult {
        topology: topo.kind,
        per_role_area: sized
            .positions
            .iter()
            .map(|(r, p)| (*r, p.chip_area()))
            .collect(),
        partial_load_factor: factor,
        total_area_delta: sized.total_chip_area() / reference_area - 1.0,
        added_area_delta: sized.partial_load_chip_area() / reference_area,
        binding_constraint: bound,
        design_op,
        margins: Margins {
            thermal_k: check.thermal_margin,
            ripple_v: check.ripple_margin,
            modulation: check.capability_margin,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spans_the_bounds() {
        let last = grid_len() - 1;
        assert_eq!(grid_area(0), AREA_MIN);
        assert_eq!(grid_area(last), AREA_MAX);
        assert!(grid_area(last - 1) < AREA_MAX);
        for k in 1..last {
            assert!((grid_area(k) / grid_area(k - 1) - AREA_STEP).abs() < 1e-12);
        }
    }

    #[test]
    fn search_finds_threshold_on_grid() {
        let threshold = 1.2345;
        let check = |a: f64| {
            Ok(Check {
                violated: (a < threshold).then_some(Constraint::Thermal),
                thermal_margin: a - threshold,
                ripple_margin: 0.0,
                capability_margin: 0.0,
            })
        };
        let (a, bound) = min_feasible_area(check).unwrap();
        assert_eq!(bound, Some(Constraint::Thermal));
        let k = (0..grid_len())
            .find(|&k| grid_area(k) >= threshold)
            .unwrap();
        assert_eq!(a, grid_area(k));
    }

    #[test]
    fn binding_constraint_is_the_one_just_below_the_result() {
        // ripple fails below 0.5, the junction limit below 2.0
        let check = |a: f64| {
            let violated = if a < 0.5 {
                Some(Constraint::Ripple)
            } else if a < 2.0 {
                Some(Constraint::Thermal)
            } else {
                None
            };
            Ok(Check {
                violated,
                thermal_margin: a - 2.0,
                ripple_margin: a - 0.5,
                capability_margin: 0.0,
            })
        };
        assert_eq!(
            min_feasible_area(check).unwrap().1,
            Some(Constraint::Thermal)
        );
        let ripple_only = |a: f64| {
            check(a * 4.0).map(|c| Check {
                violated: c.violated.filter(|&v| v == Constraint::Ripple),
                ..c
            })
        };
        let (a, bound) = min_feasible_area(ripple_only).unwrap();
        assert_eq!(bound, Some(Constraint::Ripple));
        assert!((0.125..0.125 * AREA_STEP).contains(&a));
        let free = |_a: f64| {
            Ok(Check {
                violated: None,
                thermal_margin: 1.0,
                ripple_margin: 1.0,
                capability_margin: 0.0,
            })
        };
        assert_eq!(min_feasible_area(free).unwrap(), (AREA_MIN, None));
    }

    #[test]
    fn search_reports_violation_at_upper_bound() {
        let check = |_a: f64| {
            Ok(Check {
                violated: Some(Constraint::Ripple),
                thermal_margin: 0.0,
                ripple_margin: -1.0,
                capability_margin: 0.0,
            })
        };
        match min_feasible_area(check) {
            Err(Error::SizingInfeasible { constraint, .. }) => assert_eq!(constraint, "ripple"),
            other => panic!("{other:?}"),
        }
    }
}
