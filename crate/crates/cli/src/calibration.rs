//! Calibration of the surrogate machine maps to target loss shares.
//!
//! The surrogate dq machine fixes the operating-point map and the shapes of
//! the fundamental and harmonic loss maps. Both loss maps are then scaled so
//! that, over the configured cycle with the SiC two-level bridge, they take
//! the target shares of the total drivetrain loss, with the simulated
//! inverter loss holding the inverter shares.

use std::path::{Path, PathBuf};

use drivesim_core::economics::Breakdown;
use drivesim_core::motor::{synthesize, DqMachine, Grid, MotorModel, SyntheticLosses};
use drivesim_core::pipeline::simulate_cycle;
use drivesim_core::topology::TopologyKind;
use serde::{Deserialize, Serialize};

use crate::config::{Loaded, RunConfig};
use crate::error::{Error, Result};
use crate::study::size_topologies;

/// Evenly spaced axis from zero; `max` is appended when it is not a multiple
/// of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub step: f64,
    pub max: f64,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        let n = (self.max / self.step + 1e-9).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * self.step).collect();
        if self.max - v[n] > 1e-9 * self.max {
            v.push(self.max);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surrogate {
    pub machine: DqMachine,
    pub losses: SyntheticLosses,
    pub speeds: Axis,
    pub torques: Axis,
    /// Target share of each mechanism in the total cycle loss.
    pub target_shares: Breakdown,
}

impl Surrogate {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path, e.to_string()))?;
        toml::from_str(&text).map_err(|e| Error::config(path, e.to_string()))
    }

    /// The unscaled tabulated machine for the motor section of `run`.
    pub fn model(&self, run: &RunConfig) -> Result<MotorModel> {
        let m = &run.motor;
        if m.pole_pairs != self.machine.pole_pairs {
            return Err(Error::config(
                "",
                format!(
                    "motor has {} pole pairs, surrogate machine {}",
                    m.pole_pairs, self.machine.pole_pairs
                ),
            ));
        }
        Ok(synthesize(
            &self.machine,
            &self.losses,
            m.ratings,
            m.harmonic,
            self.speeds.points(),
            self.torques.points(),
            m.u_dc_ref,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub model: MotorModel,
    pub fundamental_scale: f64,
    pub harmonic_scale: f64,
    /// Reference bridge breakdown before scaling, kWh/100 km.
    pub uncalibrated: Breakdown,
    /// Reference bridge breakdown with the scaled maps, kWh/100 km.
    pub calibrated: Breakdown,
}

pub fn calibrate(run: &Loaded<RunConfig>, surrogate: &Surrogate) -> Result<Calibration> {
    let config = &run.config;
    let t = &surrogate.target_shares;
    let share_sum = t.total();
    if !(t.inv_sw >= 0.0 && t.inv_cond >= 0.0 && t.mot_f > 0.0 && t.mot_h > 0.0)
        || (share_sum - 1.0).abs() > 1e-9
    {
        return Err(Error::config(
            &run.path,
            format!("target shares must be positive and sum to one: {t:?}"),
        ));
    }
    let raw = surrogate.model(config)?;
    let library = run.load_library()?;
    let cycle = run.load_cycle()?;
    let (topologies, _) = size_topologies(&library, &config.topologies, &raw, &config.constraints)?;
    let reference = topologies
        .iter()
        .find(|t| t.kind == TopologyKind::B6Sic)
        .ok_or_else(|| {
            Error::config(
                &run.path,
                format!("calibration needs a {} topology", TopologyKind::B6Sic),
            )
        })?;
    let settings = config.settings();
    let before = simulate_cycle(reference, &config.vehicle, &cycle, &raw, &settings)?
        .result
        .breakdown_per100;
    let inverter = before.inv_sw + before.inv_cond;
    let total = inverter / (t.inv_sw + t.inv_cond);
    let fundamental_scale = t.mot_f * total / before.mot_f;
    let harmonic_scale = t.mot_h * total / before.mot_h;
    let model = MotorModel {
        loss_map_fundamental: raw
            .loss_map_fundamental
            .map_values(|v| v * fundamental_scale),
        harmonic_ref: raw.harmonic_ref.map_values(|v| v * harmonic_scale),
        ..raw
    };
    let after = simulate_cycle(reference, &config.vehicle, &cycle, &model, &settings)?
        .result
        .breakdown_per100;
    Ok(Calibration {
        model,
        fundamental_scale,
        harmonic_scale,
        uncalibrated: before,
        calibrated: after,
    })
}

/// Writes the three maps to the paths of the motor section of `run`.
pub fn write_maps(run: &Loaded<RunConfig>, model: &MotorModel) -> Result<Vec<PathBuf>> {
    let m = &run.config.motor;
    let targets = [
        run.resolve(&m.fundamental),
        run.resolve(&m.harmonic_ref),
        run.resolve(&m.op_solver),
    ];
    for (k, path) in targets.iter().enumerate() {
        let fail = |e: String| Error::Output {
            path: path.clone(),
            message: e,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| fail(e.to_string()))?;
        }
        let file = std::fs::File::create(path).map_err(|e| fail(e.to_string()))?;
        match k {
            0 => Grid::write_long_csv(&[("value", &model.loss_map_fundamental)], file),
            1 => Grid::write_long_csv(&[("value", &model.harmonic_ref)], file),
            _ => model.op_solver.write(file),
        }
        .map_err(|e| fail(e.to_string()))?;
    }
    Ok(targets.to_vec())
}
