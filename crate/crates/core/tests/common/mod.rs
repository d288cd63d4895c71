#![allow(dead_code)]

use std::collections::BTreeMap;

use drivesim_core::operating_point::OperatingPoint;
use drivesim_core::semiconductor::{ConductionModel, DeviceKind, SwitchDevice, ThermalPath};
use drivesim_core::topology::{ModePolicy, Role, SwitchPosition, TopologyConfig, TopologyKind};

pub fn mosfet(name: &str, blocking: f64, r_on: f64, e_on: f64, e_off: f64) -> SwitchDevice {
    SwitchDevice {
        name: name.into(),
        kind: DeviceKind::SicMosfet,
        blocking_voltage: blocking,
        conduction: ConductionModel::Resistive { r_on },
        t_ref: 25.0,
        temp_coeff_r: 0.004,
        e_on,
        e_off,
        e_rr: 0.0,
        i_ref: 200.0,
        u_ref: blocking * 2.0 / 3.0,
        voltage_exponent: 1.3,
        chip_area: 1.0,
    }
}

pub fn reverse_channel(t: &SwitchDevice, e_rr: f64) -> SwitchDevice {
    let r_on = match t.conduction {
        ConductionModel::Resistive { r_on } => r_on,
        ConductionModel::Threshold { r_slope, .. } => r_slope,
    };
    SwitchDevice {
        name: format!("{}-rev", t.name),
        kind: DeviceKind::SicBodyDiode,
        conduction: ConductionModel::Threshold {
            v0: 0.0,
            r_slope: r_on,
        },
        e_on: 0.0,
        e_off: 0.0,
        e_rr,
        ..t.clone()
    }
}

pub fn igbt() -> SwitchDevice {
    SwitchDevice {
        name: "igbt".into(),
        kind: DeviceKind::SiIgbt,
        blocking_voltage: 1200.0,
        conduction: ConductionModel::Threshold {
            v0: 0.8,
            r_slope: 4e-3,
        },
        t_ref: 25.0,
        temp_coeff_r: 0.003,
        e_on: 20e-3,
        e_off: 25e-3,
        e_rr: 0.0,
        i_ref: 300.0,
        u_ref: 600.0,
        voltage_exponent: 1.3,
        chip_area: 1.0,
    }
}

pub fn si_diode() -> SwitchDevice {
    SwitchDevice {
        name: "diode".into(),
        kind: DeviceKind::SiDiode,
        conduction: ConductionModel::Threshold {
            v0: 0.9,
            r_slope: 2.5e-3,
        },
        e_on: 0.0,
        e_off: 0.0,
        e_rr: 12e-3,
        ..igbt()
    }
}

pub fn thermal() -> ThermalPath {
    ThermalPath {
        r_th_junction_case: 0.08,
        r_th_case_coolant: 0.06,
        coolant_temp: 65.0,
    }
}

pub fn position(t: SwitchDevice, d: SwitchDevice) -> SwitchPosition {
    SwitchPosition {
        transistor: t,
        diode: d,
        thermal: thermal(),
    }
}

pub fn sic_position(blocking: f64, r_on: f64, e_on: f64, e_off: f64, e_rr: f64) -> SwitchPosition {
    let t = mosfet("sic", blocking, r_on, e_on, e_off);
    let d = reverse_channel(&t, e_rr);
    position(t, d)
}

pub fn topology(kind: TopologyKind) -> TopologyConfig {
    let full = sic_position(1200.0, 3e-3, 8e-3, 4e-3, 1e-3);
    let half = sic_position(750.0, 4e-3, 3e-3, 1.5e-3, 0.4e-3);
    let positions: BTreeMap<Role, SwitchPosition> = match kind {
        TopologyKind::B6Si => [
            (1, position(igbt(), si_diode())),
            (2, position(igbt(), si_diode())),
        ]
        .into_iter()
        .map(|(r, p)| (Role(r), p))
        .collect(),
        TopologyKind::B6Sic => (1..=2).map(|r| (Role(r), full.clone())).collect(),
        TopologyKind::TnpcSic => (1..=4)
            .map(|r| (Role(r), if r <= 2 { full.clone() } else { half.clone() }))
            .collect(),
        TopologyKind::AnpcSic => (1..=6).map(|r| (Role(r), half.clone())).collect(),
    };
    let cfg = TopologyConfig {
        kind,
        f_sw: 10e3,
        positions,
        dc_link_capacitance: 400e-6,
        mode_policy: ModePolicy::MinLoss,
    };
    cfg.validate().unwrap();
    cfg
}

pub fn op(m: f64, pf: f64, i: f64) -> OperatingPoint {
    OperatingPoint::electrical_only(m, pf, i, 50.0, 800.0)
}

pub fn machine() -> drivesim_core::motor::DqMachine {
    drivesim_core::motor::DqMachine {
        pole_pairs: 4,
        psi_pm: 0.1,
        l_d: 0.15e-3,
        l_q: 0.35e-3,
        r_s: 8e-3,
        i_max: 600.0,
    }
}

pub fn motor() -> drivesim_core::motor::MotorModel {
    use drivesim_core::motor::{synthesize, HarmonicModel, MotorRatings, SyntheticLosses};
    synthesize(
        &machine(),
        &SyntheticLosses {
            iron: 800.0,
            mechanical: 60.0,
            harmonic: 0.05,
        },
        MotorRatings {
            max_power: 250e3,
            max_torque: 400.0,
            max_speed: 1600.0,
        },
        HarmonicModel::new(10e3),
        (0..=32).map(|k| k as f64 * 50.0).collect(),
        (0..=20).map(|k| k as f64 * 20.0).collect(),
        800.0,
    )
    .unwrap()
}

pub fn vehicle() -> drivesim_core::cycle::VehicleParams {
    drivesim_core::cycle::VehicleParams {
        mass: 2000.0,
        drag_area: 0.70,
        rolling_coeff: 0.010,
        wheel_radius: 0.34,
        gear_ratio: 10.0,
        driveline_eff: 0.97,
        aux_power: 0.0,
        air_density: 1.2,
        gravity: 9.81,
    }
}

pub fn wltp() -> drivesim_core::cycle::DriveCycle {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/cycles/wltc_class3b.csv"
    );
    drivesim_core::cycle::load_cycle(path).unwrap()
}
