//! Fundamental-period averages of the current stress seen by each element of
//! a phase leg, integrated in closed form.
//!
//! The period is split at sector boundaries of the injected reference, at the
//! reference zeros and at the current zeros. On each piece the duty cycle of
//! every leg state and the current are trigonometric polynomials, so the
//! duty-weighted |i| and i² integrate exactly.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::modulation::{phase_a_reference_poly, sector_boundaries};
use crate::operating_point::ElectricalState;
use crate::semiconductor::SwitchEvent;
use crate::topology::{
    commutations, conduction_path, Element, HalfWave, LegState, Mode, TopologyKind,
};
use crate::trig::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementStress {
    /// Period average of duty-weighted |i|, A.
    pub a1: f64,
    /// Period average of duty-weighted i², A².
    pub a2: f64,
}

/// Period average of |i| over the carrier periods in which an element sees
/// a given event; multiplied by the per-ampere event energy and f_sw it gives
/// the switching loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchStress {
    pub element: Element,
    pub event: SwitchEvent,
    pub voltage_fraction: f64,
    pub mean_current: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegStresses {
    pub mode: Mode,
    pub conduction: BTreeMap<Element, ElementStress>,
    pub switching: Vec<SwitchStress>,
}

fn breakpoints(phi: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = sector_boundaries().to_vec();
    pts.extend([
        0.0,
        PI,
        TAU,
        phi.rem_euclid(TAU),
        (phi + PI).rem_euclid(TAU),
    ]);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    pts
}

/// Duty polynomials of the leg states on a piece with reference `r`.
fn state_duties(mode: Mode, half: HalfWave, r: &TrigPoly) -> Vec<(LegState, TrigPoly)> {
    let one = TrigPoly::constant(1.0);
    match (mode, half) {
        (Mode::TwoLevel, _) => vec![
            (LegState::P, one.add(r).scale(0.5)),
            (LegState::N, one.add(&r.scale(-1.0)).scale(0.5)),
        ],
        (Mode::ThreeLevel, HalfWave::Positive) => vec![
            (LegState::P, r.clone()),
            (LegState::O, one.add(&r.scale(-1.0))),
        ],
        (Mode::ThreeLevel, HalfWave::Negative) => {
            vec![(LegState::N, r.scale(-1.0)), (LegState::O, one.add(r))]
        }
    }
}

fn transitions(mode: Mode, half: HalfWave) -> [(LegState, LegState); 2] {
    match (mode, half) {
        (Mode::TwoLevel, _) => [(LegState::P, LegState::N), (LegState::N, LegState::P)],
        (Mode::ThreeLevel, HalfWave::Positive) => {
            [(LegState::P, LegState::O), (LegState::O, LegState::P)]
        }
        (Mode::ThreeLevel, HalfWave::Negative) => {
            [(LegState::N, LegState::O), (LegState::O, LegState::N)]
        }
    }
}

/// Averaged stresses of one leg (phase a; the other legs are identical).
pub fn leg_stresses(kind: TopologyKind, mode: Mode, state: &ElectricalState) -> LegStresses {
    let mut conduction: BTreeMap<Element, ElementStress> = BTreeMap::new();
    let mut switching: Vec<SwitchStress> = Vec::new();
    let amp = state.phase_current_peak;
    let m = state.modulation_index;
    if amp > 0.0 {
        let phi = state.phase_angle();
        let pts = breakpoints(phi);
        // a three-level leg at zero modulation never leaves O
        let switches = !(mode == Mode::ThreeLevel && m == 0.0);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let half = if mid < PI {
                HalfWave::Positive
            } else {
                HalfWave::Negative
            };
            let positive = (mid - phi).sin() > 0.0;
            let sign = if positive { 1.0 } else { -1.0 };
            let abs_i = TrigPoly::sinusoid(1, sign * amp, -phi);
            let sq_i = abs_i.mul(&abs_i);
            let r = phase_a_reference_poly(m, mid);
            for (leg_state, duty) in state_duties(mode, half, &r) {
                let s1 = duty.mul(&abs_i).integrate(a, b) / TAU;
                let s2 = duty.mul(&sq_i).integrate(a, b) / TAU;
                for &e in conduction_path(kind, mode, leg_state, half, positive) {
                    let entry = conduction.entry(e).or_default();
                    entry.a1 += s1;
                    entry.a2 += s2;
                }
            }
            if switches {
                let mean_abs = abs_i.integrate(a, b) / TAU;
                for (from, to) in transitions(mode, half) {
                    for c in commutations(kind, mode, from, to, half, positive) {
                        match switching.iter_mut().find(|s| {
                            s.element == c.element
                                && s.event == c.event
                                && s.voltage_fraction == c.voltage_fraction
                        }) {
                            Some(s) => s.mean_current += mean_abs,
                            None => switching.push(SwitchStress {
                                element: c.element,
                                event: c.event,
                                voltage_fraction: c.voltage_fraction,
                                mean_current: mean_abs,
                            }),
                        }
                    }
                }
            }
        }
    }
    switching.sort_by(|x, y| {
        (x.element, x.event)
            .cmp(&(y.element, y.event))
            .then(x.voltage_fraction.total_cmp(&y.voltage_fraction))
    });
    LegStresses {
        mode,
        conduction,
        switching,
    }
}
