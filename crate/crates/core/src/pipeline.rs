//! Drivetrain losses per operating point and over a drive cycle.

use serde::{Deserialize, Serialize};

use crate::cycle::{cycle_operating_points, DriveCycle, VehicleParams};
use crate::economics::{integrate_cycle, CycleLossSeries, CycleResult, PowerSeries};
use crate::error::{Error, Result};
use crate::inverter::{active_roles, dc_link_ripple, select_mode, thermal_losses, LossBreakdown};
use crate::motor::MotorModel;
use crate::operating_point::OperatingPoint;
use crate::semiconductor::ElectroThermalSettings;
use crate::sizing::Constraint;
use crate::topology::{Mode, ModePolicy, TopologyConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub t_j_max: f64,
    pub ripple_frac: f64,
    pub dc_voltage: f64,
    pub thermal: ElectroThermalSettings,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            t_j_max: 175.0,
            ripple_frac: 0.05,
            dc_voltage: 800.0,
            thermal: ElectroThermalSettings::default(),
        }
    }
}

/// One mode evaluated at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEvaluation {
    pub mode: Mode,
    pub inverter: LossBreakdown,
    pub max_junction_temp: f64,
    pub ripple: f64,
    pub p_mot_h: f64,
    pub violated: Option<Constraint>,
}

impl ModeEvaluation {
    /// Mode-dependent part of the drivetrain loss.
    pub fn loss(&self) -> f64 {
        self.inverter.total() + self.p_mot_h
    }
}

pub fn evaluate_mode(
    topo: &TopologyConfig,
    motor: &MotorModel,
    op: &OperatingPoint,
    mode: Mode,
    settings: &SimulationSettings,
) -> Result<ModeEvaluation> {
    let p_mot_h = motor.harmonic_loss(op, mode, topo.f_sw)?;
    let ripple = dc_link_ripple(topo, op, mode)?.delta_u;
    let (inverter, max_junction_temp) = match thermal_losses(topo, op, mode, &settings.thermal) {
        Ok(t) => {
            let hottest = t.max_junction_temp(active_roles(topo.kind, mode));
            (t.losses, hottest)
        }
        Err(Error::ThermalRunaway { .. }) => {
            let fallback = crate::inverter::analytic_losses(topo, op, mode)?;
            (fallback, f64::INFINITY)
        }
        Err(e) => return Err(e),
    };
    let violated = if max_junction_temp > settings.t_j_max {
        Some(Constraint::Thermal)
    } else if ripple > settings.ripple_frac * op.dc_voltage {
        Some(Constraint::Ripple)
    } else {
        None
    };
    Ok(ModeEvaluation {
        mode,
        inverter,
        max_junction_temp,
        ripple,
        p_mot_h,
        violated,
    })
}

/// Loss components at one operating point in the selected mode, W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLoss {
    pub mode: Mode,
    pub inv_sw: f64,
    pub inv_cond: f64,
    pub mot_f: f64,
    pub mot_h: f64,
}

impl PointLoss {
    pub fn total(&self) -> f64 {
        self.inv_sw + self.inv_cond + self.mot_f + self.mot_h
    }
}

/// Evaluates all modes the topology offers and applies its mode policy.
/// `time` only labels the error when no mode is feasible.
pub fn evaluate_point(
    topo: &TopologyConfig,
    motor: &MotorModel,
    op: &OperatingPoint,
    settings: &SimulationSettings,
    time: f64,
) -> Result<PointLoss> {
    let evals = topo
        .kind
        .modes()
        .iter()
        .map(|&mode| evaluate_mode(topo, motor, op, mode, settings))
        .collect::<Result<Vec<_>>>()?;
    let eval_of = |mode: Mode| evals.iter().find(|e| e.mode == mode);
    let feasible = |mode: Mode| eval_of(mode).is_some_and(|e| e.violated.is_none());
    let mut mode = select_mode(
        topo,
        op,
        |_| feasible(Mode::ThreeLevel),
        |m| eval_of(m).map_or(f64::INFINITY, ModeEvaluation::loss),
    );
    if !feasible(mode) {
        let other = match mode {
            Mode::TwoLevel => Mode::ThreeLevel,
            Mode::ThreeLevel => Mode::TwoLevel,
        };
        if topo.mode_policy != ModePolicy::Always2L && feasible(other) {
            mode = other;
        } else {
            let constraint = eval_of(mode)
                .and_then(|e| e.violated)
                .unwrap_or(Constraint::Capability);
            return Err(Error::NoFeasibleMode {
                topology: topo.kind.to_string(),
                time,
                constraint: constraint.to_string(),
            });
        }
    }
    let chosen = eval_of(mode).expect("selected mode was evaluated");
    Ok(PointLoss {
        mode,
        inv_sw: chosen.inverter.p_sw_inv,
        inv_cond: chosen.inverter.p_cond_inv,
        mot_f: motor.fundamental_loss(op)?,
        mot_h: chosen.p_mot_h,
    })
}

/// Loss of one cycle interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub start: f64,
    pub duration: f64,
    pub op: OperatingPoint,
    pub loss: PointLoss,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSimulation {
    pub result: CycleResult,
    pub trace: Vec<TracePoint>,
}

/// Runs the whole chain for one topology over a drive cycle.
pub fn simulate_cycle(
    topo: &TopologyConfig,
    vehicle: &VehicleParams,
    cycle: &DriveCycle,
    motor: &MotorModel,
    settings: &SimulationSettings,
) -> Result<CycleSimulation> {
    topo.validate()?;
    let ops = cycle_operating_points(cycle, vehicle, motor, settings.dc_voltage)?;
    let trace = ops
        .iter()
        .map(|p| {
            let loss = evaluate_point(topo, motor, &p.op, settings, p.start)?;
            Ok(TracePoint {
                start: p.start,
                duration: p.duration,
                op: p.op,
                loss,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let series = |f: fn(&PointLoss) -> f64| {
        PowerSeries::piecewise_constant(trace.iter().map(|t| (t.start, t.duration, f(&t.loss))))
    };
    let losses = CycleLossSeries {
        inv_sw: series(|l| l.inv_sw)?,
        inv_cond: series(|l| l.inv_cond)?,
        mot_f: series(|l| l.mot_f)?,
        mot_h: series(|l| l.mot_h)?,
        time_3l: trace
            .iter()
            .filter(|t| t.loss.mode == Mode::ThreeLevel)
            .map(|t| t.duration)
            .fold(0.0, |a, x| a + x),
    };
    Ok(CycleSimulation {
        result: integrate_cycle(&losses, cycle)?,
        trace,
    })
}
