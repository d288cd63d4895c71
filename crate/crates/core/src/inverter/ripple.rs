//! DC-link capacitor current and voltage ripple from carrier-period averages.
//!
//! Within one carrier period the centred PWM pulses of the three legs are
//! nested, so the DC-side current is piecewise constant between the pulse
//! edges. The capacitor RMS current follows from the local mean square
//! averaged over the fundamental period; the voltage ripple from the largest
//! charge excursion of any carrier period. In three-level operation the
//! equivalent current ½·Σ s_k·i_k is used and the neutral-point current is
//! not modelled.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::{references, PHASE_SHIFTS};
use crate::operating_point::OperatingPoint;
use crate::topology::{Mode, TopologyConfig};

/// Allowed peak ripple relative to the DC-link voltage.
pub const RIPPLE_FRACTION: f64 = 0.05;

const THETA_STEPS: usize = 1440;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RippleEstimate {
    /// Peak voltage excursion (half of peak-to-peak), V.
    pub delta_u: f64,
    pub i_cap_rms: f64,
    pub limit: f64,
    pub within_limit: bool,
}

/// Switching function of one leg on the normalised carrier period: pulse
/// intervals with their sign.
fn pulses(mode: Mode, r: f64) -> Vec<(f64, f64, f64)> {
    match mode {
        Mode::TwoLevel => {
            let d = 0.5 * (1.0 + r);
            vec![
                (0.0, 0.5 - 0.5 * d, -1.0),
                (0.5 - 0.5 * d, 0.5 + 0.5 * d, 1.0),
                (0.5 + 0.5 * d, 1.0, -1.0),
            ]
        }
        Mode::ThreeLevel if r >= 0.0 => vec![(0.5 - 0.5 * r, 0.5 + 0.5 * r, 1.0)],
        Mode::ThreeLevel => vec![(0.0, -0.5 * r, -1.0), (1.0 + 0.5 * r, 1.0, -1.0)],
    }
}

/// Piecewise-constant equivalent DC current over one carrier period as
/// `(width, current)` segments.
fn carrier_segments(mode: Mode, refs: &[f64; 3], currents: &[f64; 3]) -> Vec<(f64, f64)> {
    let legs: Vec<Vec<(f64, f64, f64)>> = refs.iter().map(|&r| pulses(mode, r)).collect();
    let mut edges: Vec<f64> = vec![0.0, 1.0];
    for leg in &legs {
        for &(a, b, _) in leg {
            edges.push(a.clamp(0.0, 1.0));
            edges.push(b.clamp(0.0, 1.0));
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let i_eq: f64 = legs
                .iter()
                .zip(currents)
                .map(|(leg, &i)| {
                    let s = leg
                        .iter()
                        .find(|&&(a, b, _)| mid >= a && mid < b)
                        .map_or(0.0, |p| p.2);
                    0.5 * s * i
                })
                .sum();
            (w[1] - w[0], i_eq)
        })
        .collect()
}

/// Mean and mean square of the DC-side current and the largest charge
/// excursion of one carrier period, sampled at `steps` angles spread over
/// `span` of the fundamental.
///
/// Advancing the fundamental by 60° maps every leg onto a neighbour with
/// negated reference and current, which moves all pulse patterns by half a
/// carrier period together. One sixth of the period therefore carries all
/// the information.
fn moments(
    mode: Mode,
    op: &OperatingPoint,
    steps: usize,
    span: f64,
    carrier_period: f64,
) -> (f64, f64, f64) {
    let el = &op.electrical;
    let phi = el.phase_angle();
    let per_theta: Vec<Vec<(f64, f64)>> = (0..steps)
        .map(|k| {
            let theta = (k as f64 + 0.5) * span / steps as f64;
            let refs = references(el.modulation_index, theta);
            let currents = PHASE_SHIFTS.map(|s| el.phase_current_peak * (theta + s - phi).sin());
            carrier_segments(mode, &refs, &currents)
        })
        .collect();
    let n = steps as f64;
    let mean: f64 = per_theta
        .iter()
        .map(|seg| seg.iter().map(|(w, i)| w * i).sum::<f64>())
        .sum::<f64>()
        / n;
    let mean_square: f64 = per_theta
        .iter()
        .map(|seg| seg.iter().map(|(w, i)| w * i * i).sum::<f64>())
        .sum::<f64>()
        / n;
    let q_pp = per_theta
        .iter()
        .map(|seg| {
            let (mut q, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
            for &(w, i) in seg {
                q += (i - mean) * w * carrier_period;
                lo = lo.min(q);
                hi = hi.max(q);
            }
            hi - lo
        })
        .fold(0.0, f64::max);
    (mean, mean_square, q_pp)
}

pub fn dc_link_ripple(
    topo: &TopologyConfig,
    op: &OperatingPoint,
    mode: Mode,
) -> Result<RippleEstimate> {
    topo.ensure_mode(mode)?;
    if !(topo.dc_link_capacitance > 0.0) {
        return Err(Error::InvalidParameter(
            "DC-link capacitance must be positive".into(),
        ));
    }
    let el = &op.electrical;
    let limit = RIPPLE_FRACTION * op.dc_voltage;
    if el.phase_current_peak == 0.0 {
        return Ok(RippleEstimate {
            delta_u: 0.0,
            i_cap_rms: 0.0,
            limit,
            within_limit: true,
        });
    }
    let (mean, mean_square, q_pp) = moments(mode, op, THETA_STEPS / 6, TAU / 6.0, 1.0 / topo.f_sw);
    let i_cap_rms = (mean_square - mean * mean).max(0.0).sqrt();
    let delta_u = q_pp / (2.0 * topo.dc_link_capacitance);
    Ok(RippleEstimate {
        delta_u,
        i_cap_rms,
        limit,
        within_limit: delta_u <= limit,
    })
}
