//! Synthetic interior-PM machine in dq coordinates. Used to generate the
//! operating-point solver map and the loss-map shapes; its parameters are
//! invented, not taken from any real machine.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operating_point::{ElectricalState, MAX_LINEAR_MODULATION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqMachine {
    pub pole_pairs: u32,
    /// Permanent-magnet flux linkage, Vs (peak).
    pub psi_pm: f64,
    pub l_d: f64,
    pub l_q: f64,
    pub r_s: f64,
    /// Peak phase-current limit, A.
    pub i_max: f64,
}

/// Solved stator state at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqState {
    pub i_d: f64,
    pub i_q: f64,
    pub v_d: f64,
    pub v_q: f64,
    pub electrical: ElectricalState,
}

impl DqState {
    pub fn current(&self) -> f64 {
        self.i_d.hypot(self.i_q)
    }

    pub fn voltage(&self) -> f64 {
        self.v_d.hypot(self.v_q)
    }
}

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

impl DqMachine {
    pub fn validate(&self) -> Result<()> {
        let ok = self.pole_pairs > 0
            && self.psi_pm > 0.0
            && self.l_d > 0.0
            && self.l_q >= self.l_d
            && self.r_s >= 0.0
            && self.i_max > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "dq machine needs positive ψ, L_d ≤ L_q, R_s ≥ 0 and a current limit".into(),
            ))
        }
    }

    pub fn max_voltage(u_dc: f64) -> f64 {
        MAX_LINEAR_MODULATION * u_dc / 2.0
    }

    /// Torque for current amplitude `i` at advance angle `beta` (from the q axis).
    pub fn torque(&self, i: f64, beta: f64) -> f64 {
        let (s, c) = beta.sin_cos();
        1.5 * self.pole_pairs as f64 * (self.psi_pm * i * c + (self.l_q - self.l_d) * i * i * s * c)
    }

    /// Current amplitude needed for `torque` at angle `beta`, or infinity when
    /// the angle cannot produce it.
    pub fn current_for_torque(&self, torque: f64, beta: f64) -> f64 {
        let (s, c) = beta.sin_cos();
        let k = 1.5 * self.pole_pairs as f64;
        let b = k * self.psi_pm * c;
        let a = k * (self.l_q - self.l_d) * s * c;
        if torque == 0.0 {
            return 0.0;
        }
        let disc = b * b + 4.0 * a * torque;
        if b <= 0.0 || disc < 0.0 {
            return f64::INFINITY;
        }
        2.0 * torque / (b + disc.sqrt())
    }

    fn state(&self, i_d: f64, i_q: f64, omega_e: f64, u_dc: f64) -> DqState {
        let v_d = self.r_s * i_d - omega_e * self.l_q * i_q;
        let v_q = self.r_s * i_q + omega_e * (self.psi_pm + self.l_d * i_d);
        let v = v_d.hypot(v_q);
        let i = i_d.hypot(i_q);
        let power_factor = if i == 0.0 || v == 0.0 {
            1.0
        } else {
            ((v_d * i_d + v_q * i_q) / (v * i)).clamp(-1.0, 1.0)
        };
        DqState {
            i_d,
            i_q,
            v_d,
            v_q,
            electrical: ElectricalState {
                modulation_index: v / (u_dc / 2.0),
                power_factor,
                phase_current_peak: i,
                fundamental_freq: omega_e / std::f64::consts::TAU,
            },
        }
    }

    fn state_at_angle(&self, torque: f64, beta: f64, omega_e: f64, u_dc: f64) -> DqState {
        let i = self.current_for_torque(torque, beta);
        self.state(-i * beta.sin(), i * beta.cos(), omega_e, u_dc)
    }

    /// MTPA current angle for a positive torque.
    pub fn mtpa_angle(&self, torque: f64) -> f64 {
        golden_min(0.0, FRAC_PI_2 - 1e-9, |b| {
            self.current_for_torque(torque, b)
        })
    }

    /// Stator state for a non-negative torque at mechanical `speed`: MTPA where
    /// the voltage allows it, otherwise field weakening along the constant
    /// torque curve up to its minimum-voltage point.
    pub fn solve(&self, speed: f64, torque: f64, u_dc: f64) -> Result<DqState> {
        let v_max = Self::max_voltage(u_dc);
        let omega_e = self.pole_pairs as f64 * speed.abs();
        let infeasible = || Error::VoltageInfeasible {
            speed,
            torque,
            u_dc,
        };
        if torque < 0.0 || !torque.is_finite() {
            return Err(Error::Domain(format!(
                "dq solve needs torque ≥ 0, got {torque}"
            )));
        }
        if torque == 0.0 {
            let idle = self.state(0.0, 0.0, omega_e, u_dc);
            if idle.voltage() <= v_max {
                return Ok(idle);
            }
            // pure d-axis current that pulls the voltage back to the limit
            let volt = |i_d: f64| self.state(i_d, 0.0, omega_e, u_dc).voltage();
            let (mut lo, mut hi) = (-self.psi_pm / self.l_d, 0.0);
            if volt(lo) > v_max {
                return Err(infeasible());
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if volt(mid) > v_max {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if -lo > self.i_max {
                return Err(infeasible());
            }
            return Ok(self.state(lo, 0.0, omega_e, u_dc));
        }
        let beta_mtpa = self.mtpa_angle(torque);
        let mtpa = self.state_at_angle(torque, beta_mtpa, omega_e, u_dc);
        let result = if mtpa.voltage() <= v_max {
            mtpa
        } else {
            let volt = |b: f64| self.state_at_angle(torque, b, omega_e, u_dc).voltage();
            let beta_v = golden_min(beta_mtpa, FRAC_PI_2 - 1e-9, volt);
            if volt(beta_v) > v_max {
                return Err(infeasible());
            }
            let (mut lo, mut hi) = (beta_mtpa, beta_v);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if volt(mid) > v_max {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            self.state_at_angle(torque, hi, omega_e, u_dc)
        };
        if result.current() > self.i_max * (1.0 + 1e-9) {
            return Err(infeasible());
        }
        Ok(result)
    }

    /// Largest torque reachable at `speed` within the current and voltage limits.
    pub fn max_torque(&self, speed: f64, u_dc: f64) -> f64 {
        let feasible = |t: f64| self.solve(speed, t, u_dc).is_ok();
        let mut hi = self.torque(self.i_max, self.mtpa_angle_at_current(self.i_max));
        if feasible(hi) {
            return hi;
        }
        let mut lo = 0.0;
        if !feasible(lo) {
            return 0.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Angle of maximum torque for a fixed current amplitude.
    pub fn mtpa_angle_at_current(&self, i: f64) -> f64 {
        golden_min(0.0, FRAC_PI_2, |b| -self.torque(i, b))
    }

    /// Fundamental flux-linkage amplitude, used to scale iron losses.
    pub fn flux_linkage(state: &DqState, omega_e: f64) -> f64 {
        if omega_e > 0.0 {
            state.voltage() / omega_e
        } else {
            0.0
        }
    }
}
