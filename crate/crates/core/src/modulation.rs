//! Space-vector PWM realised as sinusoidal references plus min-max
//! common-mode injection, and the matching carriers.

use std::f64::consts::{PI, TAU};

use crate::trig::TrigPoly;

/// Electrical phase shifts of phases a, b, c.
pub const PHASE_SHIFTS: [f64; 3] = [0.0, -TAU / 3.0, TAU / 3.0];

/// Min-max injected references `m·(sin θ_k + z)`, normalised to ±1 = ±U_dc/2.
pub fn references(m: f64, theta: f64) -> [f64; 3] {
    let s = PHASE_SHIFTS.map(|shift| (theta + shift).sin());
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let zero_seq = -0.5 * (max + min);
    s.map(|v| m * (v + zero_seq))
}

/// Angles (rad, in `[0, 2π)`) where the middle phase changes and the
/// injected reference of phase a switches between sinusoidal pieces.
pub fn sector_boundaries() -> [f64; 6] {
    std::array::from_fn(|j| PI / 6.0 + j as f64 * PI / 3.0)
}

/// Index of the phase holding the middle value at `theta`.
fn middle_phase(theta: f64) -> usize {
    let s = PHASE_SHIFTS.map(|shift| (theta + shift).sin());
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    idx[1]
}

/// Phase-a reference as a trigonometric polynomial valid on the sector that
/// contains `theta`. Since the three sinusoids sum to zero, the min-max
/// zero-sequence equals half the middle phase.
pub fn phase_a_reference_poly(m: f64, theta: f64) -> TrigPoly {
    let mid = middle_phase(theta);
    TrigPoly::sinusoid(1, m, 0.0).add(&TrigPoly::sinusoid(1, 0.5 * m, PHASE_SHIFTS[mid]))
}

/// Symmetric triangular carrier in `[-1, 1]`: +1 at period edges, −1 at the
/// centre. `phase` is time in units of carrier periods.
pub fn triangle_carrier(phase: f64) -> f64 {
    let frac = phase - phase.floor();
    4.0 * (frac - 0.5).abs() - 1.0
}
