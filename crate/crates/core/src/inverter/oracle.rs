//! Time-domain switching simulation over one fundamental period.
//!
//! All three legs are compared against the triangular carrier(s) with
//! naturally sampled references. Conduction is accumulated per sample;
//! switching instants are located by bisection inside each carrier half
//! period, where the carrier is monotone and at most one crossing per
//! comparator exists.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::error::Result;
use crate::modulation::{references, triangle_carrier, PHASE_SHIFTS};
use crate::operating_point::OperatingPoint;
use crate::topology::{commutations, conduction_path, HalfWave, LegState, Mode, TopologyConfig};

use super::{DeviceKey, DeviceLoss, LossBreakdown};

/// Fundamental frequency used when the operating point is at standstill.
const STANDSTILL_FREQ: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub losses: LossBreakdown,
    /// Distinct commutated voltages seen by any switching event, V.
    pub commutation_voltages: Vec<f64>,
    pub event_count: usize,
    /// RMS of the DC-link capacitor current with the mean drawn from the source, A.
    pub i_cap_rms: f64,
}

fn leg_state(mode: Mode, r: f64, carrier: f64) -> LegState {
    match mode {
        Mode::TwoLevel => {
            if r > carrier {
                LegState::P
            } else {
                LegState::N
            }
        }
        Mode::ThreeLevel => {
            let upper = 0.5 * (carrier + 1.0);
            if r > upper {
                LegState::P
            } else if r < upper - 1.0 {
                LegState::N
            } else {
                LegState::O
            }
        }
    }
}

/// Position of sample `k` inside its time cell. A golden-ratio sequence
/// keeps the samples from locking onto the carrier phase, so pulse-edge
/// quantisation averages out instead of accumulating.
fn stratum_offset(k: usize) -> f64 {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    (0.5 + k as f64 * GOLDEN).fract()
}

fn switching_sign(state: LegState) -> f64 {
    match state {
        LegState::P => 1.0,
        LegState::O => 0.0,
        LegState::N => -1.0,
    }
}

fn half_of(r: f64) -> HalfWave {
    if r >= 0.0 {
        HalfWave::Positive
    } else {
        HalfWave::Negative
    }
}

pub fn oracle_losses(
    topo: &TopologyConfig,
    op: &OperatingPoint,
    mode: Mode,
    samples_per_period: usize,
) -> Result<LossBreakdown> {
    Ok(oracle_run(topo, op, mode, samples_per_period)?.losses)
}

/// Simulates one fundamental period with conduction at each device's
/// reference temperature.
pub fn oracle_run(
    topo: &TopologyConfig,
    op: &OperatingPoint,
    mode: Mode,
    samples_per_period: usize,
) -> Result<OracleRun> {
    topo.ensure_mode(mode)?;
    let el = &op.electrical;
    let f1 = if el.fundamental_freq > 0.0 {
        el.fundamental_freq
    } else {
        STANDSTILL_FREQ
    };
    let period = 1.0 / f1;
    let n = samples_per_period.max(1);
    let dt = period / n as f64;
    let m = el.modulation_index;
    let amp = el.phase_current_peak;
    let phi = el.phase_angle();
    let u_dc = op.dc_voltage;
    let kind = topo.kind;
    let current = |p: usize, t: f64| amp * (TAU * f1 * t + PHASE_SHIFTS[p] - phi).sin();
    let reference = |p: usize, t: f64| references(m, TAU * f1 * t)[p];
    let carrier = |t: f64| triangle_carrier(topo.f_sw * t);

    let mut per_device: BTreeMap<DeviceKey, DeviceLoss> = BTreeMap::new();
    for &role in kind.roles() {
        for part in [
            crate::topology::Part::Transistor,
            crate::topology::Part::Diode,
        ] {
            for phase in 0..3 {
                per_device.insert(
                    DeviceKey {
                        phase,
                        element: crate::topology::Element { role, part },
                    },
                    DeviceLoss::default(),
                );
            }
        }
    }

    let (mut sum_eq, mut sum_eq2) = (0.0, 0.0);
    for k in 0..n {
        let t = (k as f64 + stratum_offset(k)) * dt;
        let theta = TAU * f1 * t;
        let refs = references(m, theta);
        let c = carrier(t);
        let mut i_eq = 0.0;
        for (p, &r) in refs.iter().enumerate() {
            let i = current(p, t);
            let state = leg_state(mode, r, c);
            i_eq += 0.5 * switching_sign(state) * i;
            for &element in conduction_path(kind, mode, state, half_of(r), i > 0.0) {
                let device = topo.device(element);
                let loss = device.conduction_loss(i.abs(), device.t_ref);
                per_device
                    .get_mut(&DeviceKey {
                        phase: p as u8,
                        element,
                    })
                    .expect("all roles registered")
                    .conduction += loss / n as f64;
            }
        }
        sum_eq += i_eq;
        sum_eq2 += i_eq * i_eq;
    }
    let mean_eq = sum_eq / n as f64;
    let i_cap_rms = (sum_eq2 / n as f64 - mean_eq * mean_eq).max(0.0).sqrt();

    let mut voltages: Vec<f64> = Vec::new();
    let mut event_count = 0;
    let half_period = 0.5 / topo.f_sw;
    let comparators: &[f64] = match mode {
        Mode::TwoLevel => &[0.0],
        // offsets of the upper and lower carrier relative to (c + 1)/2
        Mode::ThreeLevel => &[0.0, -1.0],
    };
    let mut k = 0usize;
    loop {
        let t0 = k as f64 * half_period;
        if t0 >= period {
            break;
        }
        let t1 = (t0 + half_period).min(period);
        k += 1;
        for p in 0..3 {
            for &offset in comparators {
                let level = |t: f64| match mode {
                    Mode::TwoLevel => carrier(t),
                    Mode::ThreeLevel => 0.5 * (carrier(t) + 1.0) + offset,
                };
                let g = |t: f64| reference(p, t) - level(t);
                let (g0, g1) = (g(t0), g(t1));
                if (g0 > 0.0) == (g1 > 0.0) {
                    continue;
                }
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (g(mid) > 0.0) == (g0 > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let ts = 0.5 * (lo + hi);
                let from = leg_state(mode, reference(p, lo), carrier(lo));
                let to = leg_state(mode, reference(p, hi), carrier(hi));
                let i = current(p, ts);
                let r = reference(p, ts);
                for c in commutations(kind, mode, from, to, half_of(r), i > 0.0) {
                    let device = topo.device(c.element);
                    let voltage = c.voltage_fraction * u_dc;
                    let energy = device.switching_energy(c.event, i.abs(), voltage);
                    per_device
                        .get_mut(&DeviceKey {
                            phase: p as u8,
                            element: c.element,
                        })
                        .expect("all roles registered")
                        .switching += energy / period;
                    event_count += 1;
                    if !voltages.contains(&voltage) {
                        voltages.push(voltage);
                    }
                }
            }
        }
    }
    voltages.sort_by(f64::total_cmp);
    Ok(OracleRun {
        losses: LossBreakdown::from_devices(mode, per_device),
        commutation_voltages: voltages,
        event_count,
        i_cap_rms,
    })
}
