//! Loaded inputs of a run and the sized topologies.

use std::collections::BTreeMap;

use drivesim_core::cycle::DriveCycle;
use drivesim_core::motor::MotorModel;
use drivesim_core::operating_point::OperatingPoint;
use drivesim_core::sizing::{
    rated_operating_point, size_full_load, size_partial_load, Constraint, SizingConstraints,
    SizingResult,
};
use drivesim_core::topology::{Role, TopologyConfig, TopologyKind};
use serde::Serialize;

use crate::config::{
    file_sha256, DeviceLibrary, Loaded, RunConfig, Sizing, SizingMethod, TopologySpec,
};
use crate::error::{Error, Result};
use crate::report::{Provenance, TOOLKIT, VERSION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologySizing {
    pub topology: TopologyKind,
    pub method: String,
    /// Area factor per role relative to the library position.
    pub factors: BTreeMap<Role, f64>,
    /// Die area per role and phase leg.
    pub per_role_area: BTreeMap<Role, f64>,
    /// Die area of all three legs.
    pub total_chip_area: f64,
    /// Total area relative to the SiC two-level bridge, minus one.
    pub area_delta: Option<f64>,
    /// Partial-load die area relative to the SiC two-level bridge.
    pub added_area_delta: Option<f64>,
    pub full_load_binding: Option<Constraint>,
    pub partial_load: Option<SizingResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingReport {
    pub constraints: SizingConstraints,
    /// Operating point the full-load roles are sized for.
    pub peak_op: OperatingPoint,
    pub topologies: Vec<TopologySizing>,
}

/// Applies the sizing of every spec. Topologies come back in the order of
/// `TopologyKind::ALL`.
pub fn size_topologies(
    library: &DeviceLibrary,
    specs: &[TopologySpec],
    motor: &MotorModel,
    constraints: &SizingConstraints,
) -> Result<(Vec<TopologyConfig>, SizingReport)> {
    let mut specs: Vec<&TopologySpec> = specs.iter().collect();
    specs.sort_by_key(|s| s.kind);
    let peak_op = rated_operating_point(motor, constraints.u_dc)?;
    let mut staged = Vec::with_capacity(specs.len());
    for spec in &specs {
        let base = library
            .topology(spec, constraints)
            .map_err(|m| Error::config("", m))?;
        let mut factors: BTreeMap<Role, f64> =
            spec.kind.roles().iter().map(|&r| (r, 1.0)).collect();
        let (topo, binding) = match &spec.sizing {
            Sizing::Method(SizingMethod::AsIs) => (base, None),
            Sizing::Factors(f) => {
                let mut t = base;
                for (&role, &k) in f {
                    t = t.with_scaled_roles(&[role], k)?;
                    factors.insert(role, k);
                }
                (t, None)
            }
            Sizing::Method(SizingMethod::Auto) => {
                let full = size_full_load(&base, &peak_op, constraints)?;
                factors.extend(full.factors.iter().map(|(r, k)| (*r, *k)));
                (full.topology, full.binding_constraint)
            }
        };
        staged.push((spec, topo, factors, binding));
    }
    let reference_area = staged
        .iter()
        .find(|(s, ..)| s.kind == TopologyKind::B6Sic)
        .map(|(_, t, ..)| t.total_chip_area());
    let mut configs = Vec::with_capacity(staged.len());
    let mut reports = Vec::with_capacity(staged.len());
    for (spec, topo, mut factors, binding) in staged {
        let auto = matches!(spec.sizing, Sizing::Method(SizingMethod::Auto));
        let (topo, partial) = if auto && !spec.kind.partial_load_roles().is_empty() {
            let reference = reference_area.ok_or_else(|| {
                Error::config(
                    "",
                    format!(
                        "{}: automatic partial-load sizing needs a {} entry as area reference",
                        spec.kind,
                        TopologyKind::B6Sic
                    ),
                )
            })?;
            let result = size_partial_load(&topo, motor, constraints, reference)?;
            let sized =
                topo.with_scaled_roles(spec.kind.partial_load_roles(), result.partial_load_factor)?;
            for r in spec.kind.partial_load_roles() {
                factors.insert(*r, result.partial_load_factor);
            }
            (sized, Some(result))
        } else {
            (topo, None)
        };
        let total = topo.total_chip_area();
        reports.push(TopologySizing {
            topology: spec.kind,
            method: match &spec.sizing {
                Sizing::Method(SizingMethod::Auto) => "auto",
                Sizing::Method(SizingMethod::AsIs) => "as_is",
                Sizing::Factors(_) => "factors",
            }
            .to_string(),
            factors,
            per_role_area: topo
                .positions
                .iter()
                .map(|(r, p)| (*r, p.chip_area()))
                .collect(),
            total_chip_area: total,
            area_delta: reference_area.map(|a| total / a - 1.0),
            added_area_delta: reference_area.map(|a| topo.partial_load_chip_area() / a),
            full_load_binding: binding,
            partial_load: partial,
        });
        configs.push(topo);
    }
    Ok((
        configs,
        SizingReport {
            constraints: *constraints,
            peak_op,
            topologies: reports,
        },
    ))
}

/// Everything a simulation, sizing or comparison run reads.
#[derive(Debug, Clone)]
pub struct Study {
    pub run: Loaded<RunConfig>,
    pub motor: MotorModel,
    pub cycle: DriveCycle,
    pub library: DeviceLibrary,
    pub topologies: Vec<TopologyConfig>,
    pub sizing: SizingReport,
}

impl Study {
    pub fn load(run: Loaded<RunConfig>) -> Result<Self> {
        let library = run.load_library()?;
        let motor = run.load_motor()?;
        let cycle = run.load_cycle()?;
        let (topologies, sizing) = size_topologies(
            &library,
            &run.config.topologies,
            &motor,
            &run.config.constraints,
        )
        .map_err(|e| match e {
            Error::Config { message, .. } => Error::config(&run.path, message),
            other => other,
        })?;
        Ok(Study {
            run,
            motor,
            cycle,
            library,
            topologies,
            sizing,
        })
    }

    pub fn provenance(&self, command: &str) -> Result<Provenance> {
        let inputs = self
            .run
            .input_files()
            .into_iter()
            .map(|(what, p)| Ok((what.to_string(), file_sha256(&p)?)))
            .collect::<Result<_>>()?;
        Ok(Provenance {
            toolkit: TOOLKIT,
            version: VERSION,
            command: command.to_string(),
            config_sha256: self.run.sha256.clone(),
            inputs,
            overrides: self.run.overrides.describe(),
            seed: self.run.config.seed,
        })
    }
}
