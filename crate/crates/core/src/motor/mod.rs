//! Motor loss maps, modulation-induced harmonic losses and the operating-point
//! electrical state.
//!
//! Maps cover motoring torque (T ≥ 0). Braking points are looked up at |T|
//! with the power factor negated.

mod dq;
mod grid;

pub use dq::{DqMachine, DqState};
pub use grid::Grid;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operating_point::{ElectricalState, OperatingPoint, MAX_LINEAR_MODULATION};
use crate::topology::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorRatings {
    pub max_power: f64,
    pub max_torque: f64,
    /// Mechanical speed limit, rad/s.
    pub max_speed: f64,
}

/// Scaling of the reference harmonic loss with topology and switching frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicModel {
    pub f_sw_ref: f64,
    #[serde(default = "default_kappa")]
    pub kappa_3l: f64,
    #[serde(default = "default_beta")]
    pub beta_fsw: f64,
    #[serde(default)]
    pub capacitive_share: f64,
}

fn default_kappa() -> f64 {
    0.30
}

fn default_beta() -> f64 {
    0.6
}

impl HarmonicModel {
    pub fn new(f_sw_ref: f64) -> Self {
        HarmonicModel {
            f_sw_ref,
            kappa_3l: default_kappa(),
            beta_fsw: default_beta(),
            capacitive_share: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.f_sw_ref > 0.0
            && self.kappa_3l > 0.0
            && self.kappa_3l < 1.0
            && (0.5..=0.7).contains(&self.beta_fsw)
            && (0.0..=1.0).contains(&self.capacitive_share);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "harmonic model needs f_sw_ref > 0, κ ∈ (0,1), β ∈ [0.5,0.7], c ∈ [0,1]; got {self:?}"
            )))
        }
    }

    pub fn topology_factor(&self, mode: Mode) -> f64 {
        match mode {
            Mode::TwoLevel => 1.0,
            Mode::ThreeLevel => self.kappa_3l,
        }
    }

    /// Capacitive share above which the loss stops falling with frequency at `f_sw`.
    pub fn crossover_share(&self, f_sw: f64) -> f64 {
        let x = f_sw / self.f_sw_ref;
        let g = self.beta_fsw * x.powf(-self.beta_fsw - 1.0);
        g / (1.0 + g)
    }

    /// Multiplier applied to the reference harmonic loss.
    pub fn factor(&self, mode: Mode, f_sw: f64) -> f64 {
        let x = f_sw / self.f_sw_ref;
        let c = self.capacitive_share;
        self.topology_factor(mode) * ((1.0 - c) * x.powf(-self.beta_fsw) + c * x)
    }
}

/// Tabulated electrical state at a reference DC-link voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct OpSolverMap {
    pub u_dc_ref: f64,
    pub modulation: Grid,
    pub power_factor: Grid,
    pub current: Grid,
}

impl OpSolverMap {
    pub fn load(path: impl AsRef<Path>, u_dc_ref: f64) -> Result<Self> {
        let mut g = Grid::load(path, 3)?.into_iter();
        Ok(OpSolverMap {
            u_dc_ref,
            modulation: g.next().expect("three columns"),
            power_factor: g.next().expect("three columns"),
            current: g.next().expect("three columns"),
        })
    }

    pub fn write(&self, writer: impl std::io::Write) -> Result<()> {
        Grid::write_long_csv(
            &[
                ("m", &self.modulation),
                ("cos_phi", &self.power_factor),
                ("i_peak", &self.current),
            ],
            writer,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotorModel {
    pub pole_pairs: u32,
    pub ratings: MotorRatings,
    pub loss_map_fundamental: Grid,
    /// Harmonic loss at the reference switching frequency in two-level mode.
    pub harmonic_ref: Grid,
    pub harmonic: HarmonicModel,
    pub op_solver: OpSolverMap,
}

/// Scalar motor parameters that accompany the three map files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    pub pole_pairs: u32,
    pub ratings: MotorRatings,
    pub harmonic: HarmonicModel,
    pub u_dc_ref: f64,
}

impl MotorModel {
    pub fn load(
        params: &MotorParams,
        fundamental: impl AsRef<Path>,
        harmonic_ref: impl AsRef<Path>,
        op_solver: impl AsRef<Path>,
    ) -> Result<Self> {
        let model = MotorModel {
            pole_pairs: params.pole_pairs,
            ratings: params.ratings,
            loss_map_fundamental: Grid::load(fundamental, 1)?.remove(0),
            harmonic_ref: Grid::load(harmonic_ref, 1)?.remove(0),
            harmonic: params.harmonic,
            op_solver: OpSolverMap::load(op_solver, params.u_dc_ref)?,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn params(&self) -> MotorParams {
        MotorParams {
            pole_pairs: self.pole_pairs,
            ratings: self.ratings,
            harmonic: self.harmonic,
            u_dc_ref: self.op_solver.u_dc_ref,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.harmonic.validate()?;
        let r = &self.ratings;
        if !(r.max_power > 0.0 && r.max_torque > 0.0 && r.max_speed > 0.0) {
            return Err(Error::InvalidParameter(
                "motor ratings must be positive".into(),
            ));
        }
        if self.pole_pairs == 0 || !(self.op_solver.u_dc_ref > 0.0) {
            return Err(Error::InvalidParameter(
                "pole pairs and reference DC voltage must be positive".into(),
            ));
        }
        if !self.loss_map_fundamental.is_non_negative() || !self.harmonic_ref.is_non_negative() {
            return Err(Error::InvalidParameter(
                "loss maps must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Torque available at `speed`: the rated torque, the power hyperbola and
    /// the populated part of the operating-point map.
    pub fn torque_limit(&self, speed: f64) -> f64 {
        let speed = speed.abs();
        if speed > self.ratings.max_speed {
            return 0.0;
        }
        let power_limit = if speed > 0.0 {
            self.ratings.max_power / speed
        } else {
            f64::INFINITY
        };
        self.ratings
            .max_torque
            .min(power_limit)
            .min(self.op_solver.current.feasible_torque(speed))
    }

    pub fn check_envelope(&self, speed: f64, torque: f64) -> Result<()> {
        let speed_margin = self.ratings.max_speed - speed.abs();
        let torque_margin = self.torque_limit(speed) - torque.abs();
        if speed < 0.0 || speed_margin < 0.0 || torque_margin < -1e-9 {
            return Err(Error::OutsideEnvelope {
                speed,
                torque,
                speed_margin,
                torque_margin,
            });
        }
        Ok(())
    }

    pub fn fundamental_loss(&self, op: &OperatingPoint) -> Result<f64> {
        self.check_envelope(op.motor_speed, op.motor_torque)?;
        self.loss_map_fundamental
            .interpolate(op.motor_speed, op.motor_torque.abs())
    }

    pub fn harmonic_reference(&self, op: &OperatingPoint) -> Result<f64> {
        self.check_envelope(op.motor_speed, op.motor_torque)?;
        self.harmonic_ref
            .interpolate(op.motor_speed, op.motor_torque.abs())
    }

    pub fn harmonic_loss(&self, op: &OperatingPoint, mode: Mode, f_sw: f64) -> Result<f64> {
        if !(f_sw > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "switching frequency must be positive, got {f_sw}"
            )));
        }
        Ok(self.harmonic_reference(op)? * self.harmonic.factor(mode, f_sw))
    }

    /// Electrical state from the tabulated solver, rescaled to `u_dc`.
    pub fn solve_electrical_state(
        &self,
        speed: f64,
        torque: f64,
        u_dc: f64,
    ) -> Result<ElectricalState> {
        self.check_envelope(speed, torque)?;
        let t = torque.abs();
        let map = &self.op_solver;
        let m_ref = map.modulation.interpolate(speed, t)?;
        let modulation_index = m_ref * map.u_dc_ref / u_dc;
        if modulation_index > MAX_LINEAR_MODULATION * (1.0 + 1e-9) {
            return Err(Error::VoltageInfeasible {
                speed,
                torque,
                u_dc,
            });
        }
        let pf = map.power_factor.interpolate(speed, t)?.clamp(-1.0, 1.0);
        let current = map.current.interpolate(speed, t)?.max(0.0);
        Ok(ElectricalState {
            modulation_index: modulation_index.min(MAX_LINEAR_MODULATION),
            power_factor: if torque < 0.0 { -pf } else { pf },
            phase_current_peak: current,
            fundamental_freq: self.pole_pairs as f64 * speed / std::f64::consts::TAU,
        })
    }

    pub fn write_maps(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let create = |name: &str| {
            let path = dir.join(name);
            std::fs::File::create(&path).map_err(|source| Error::Io { path, source })
        };
        Grid::write_long_csv(
            &[("value", &self.loss_map_fundamental)],
            create(FUNDAMENTAL_FILE)?,
        )?;
        Grid::write_long_csv(&[("value", &self.harmonic_ref)], create(HARMONIC_FILE)?)?;
        self.op_solver.write(create(OP_SOLVER_FILE)?)
    }
}

pub const FUNDAMENTAL_FILE: &str = "motor_fundamental_loss.csv";
pub const HARMONIC_FILE: &str = "motor_harmonic_ref.csv";
pub const OP_SOLVER_FILE: &str = "motor_op_solver.csv";

/// Coefficients of the synthetic loss model used to fill the maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLosses {
    /// Iron loss at 1 kHz electrical frequency and PM flux, W.
    pub iron: f64,
    /// Windage and friction at 1000 rad/s, W (quadratic in speed).
    pub mechanical: f64,
    /// Harmonic loss coefficient, W/A² per unit modulation index.
    pub harmonic: f64,
}

const IRON_FREQ_REF: f64 = 1000.0;
const MECH_SPEED_REF: f64 = 1000.0;

/// Tabulates the surrogate machine into a `MotorModel`. Nodes the machine
/// cannot reach at `u_dc` are left empty.
pub fn synthesize(
    machine: &DqMachine,
    losses: &SyntheticLosses,
    ratings: MotorRatings,
    harmonic: HarmonicModel,
    speeds: Vec<f64>,
    torques: Vec<f64>,
    u_dc: f64,
) -> Result<MotorModel> {
    machine.validate()?;
    let nodes: Vec<Option<DqState>> = speeds
        .iter()
        .flat_map(|&s| torques.iter().map(move |&t| (s, t)))
        .map(|(s, t)| machine.solve(s, t, u_dc).ok())
        .collect();
    let field = |f: &dyn Fn(f64, &DqState) -> f64| -> Result<Grid> {
        let nt = torques.len();
        let values = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| n.as_ref().map_or(f64::NAN, |st| f(speeds[k / nt], st)))
            .collect();
        Grid::new(speeds.clone(), torques.clone(), values)
    };
    let p = machine.pole_pairs as f64;
    let fundamental = field(&|speed, st| {
        let omega_e = p * speed;
        let f_e = omega_e / std::f64::consts::TAU;
        let flux = DqMachine::flux_linkage(st, omega_e) / machine.psi_pm;
        let copper = 1.5 * machine.r_s * st.current().powi(2);
        let iron = losses.iron * (f_e / IRON_FREQ_REF).powf(1.5) * flux * flux;
        let mech = losses.mechanical * (speed / MECH_SPEED_REF).powi(2);
        copper + iron + mech
    })?;
    let harmonic_ref =
        field(&|_, st| losses.harmonic * st.electrical.modulation_index * st.current().powi(2))?;
    let model = MotorModel {
        pole_pairs: machine.pole_pairs,
        ratings,
        loss_map_fundamental: fundamental,
        harmonic_ref,
        harmonic,
        op_solver: OpSolverMap {
            u_dc_ref: u_dc,
            modulation: field(&|_, st| st.electrical.modulation_index)?,
            power_factor: field(&|_, st| st.electrical.power_factor)?,
            current: field(&|_, st| st.current())?,
        },
    };
    model.validate()?;
    Ok(model)
}
