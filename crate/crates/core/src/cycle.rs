//! Drive cycles, longitudinal vehicle dynamics and the mapping from a speed
//! trace to motor operating points.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motor::MotorModel;
use crate::operating_point::OperatingPoint;

pub const KMH_TO_MS: f64 = 1.0 / 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    /// Seconds from cycle start.
    pub time: f64,
    /// Vehicle speed in m/s.
    pub speed: f64,
}

/// A validated speed-versus-time trace.
///
/// Time starts at zero and is strictly increasing; speed is never negative.
/// A positive covered distance is required when a cycle is loaded from file,
/// but not for programmatically built cycles (standstill cycles are useful in
/// tests and are rejected later by the energy integration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCycle {
    name: String,
    samples: Vec<CycleSample>,
}

/// One sample-and-hold interval `[start, end)` of a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleInterval {
    pub start: f64,
    pub end: f64,
    /// Midpoint speed in m/s.
    pub speed: f64,
    /// Finite-difference acceleration in m/s².
    pub acceleration: f64,
}

impl CycleInterval {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

impl DriveCycle {
    pub fn new(name: impl Into<String>, samples: Vec<CycleSample>) -> Result<Self> {
        let name = name.into();
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "cycle '{name}' needs at least two samples"
            )));
        }
        if samples[0].time != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cycle '{name}' must start at t = 0"
            )));
        }
        for (row, s) in samples.iter().enumerate() {
            if !s.time.is_finite() || !s.speed.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "cycle '{name}' has a non-finite value at sample {row}"
                )));
            }
            if s.speed < 0.0 {
                return Err(Error::NegativeSpeed { row });
            }
            if row > 0 && s.time <= samples[row - 1].time {
                return Err(Error::NonMonotoneTime { row });
            }
        }
        Ok(DriveCycle { name, samples })
    }

    /// Builds a cycle from `(time s, speed km/h)` pairs.
    pub fn from_kmh(name: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        let samples = points
            .iter()
            .map(|&(time, kmh)| CycleSample {
                time,
                speed: kmh * KMH_TO_MS,
            })
            .collect();
        DriveCycle::new(name, samples)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[CycleSample] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.time)
    }

    /// Covered distance in metres (trapezoidal rule).
    pub fn distance(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[0].speed + w[1].speed) * (w[1].time - w[0].time))
            .sum()
    }

    pub fn intervals(&self) -> impl Iterator<Item = CycleInterval> + '_ {
        self.samples.windows(2).map(|w| {
            let dt = w[1].time - w[0].time;
            CycleInterval {
                start: w[0].time,
                end: w[1].time,
                speed: 0.5 * (w[0].speed + w[1].speed),
                acceleration: (w[1].speed - w[0].speed) / dt,
            }
        })
    }
}

/// Reads a `t_s,v_kmh` CSV file. A header row is optional.
pub fn load_cycle(path: impl AsRef<Path>) -> Result<DriveCycle> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cycle".to_owned());
    let cycle = read_cycle(name, file)?;
    if cycle.distance() <= 0.0 {
        return Err(Error::ZeroDistance(cycle.name));
    }
    Ok(cycle)
}

/// Parses cycle CSV content. Row numbers in errors are 1-based file lines.
pub fn read_cycle(name: impl Into<String>, reader: impl Read) -> Result<DriveCycle> {
    let name = name.into();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            context: name.clone(),
            row: line,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Parse {
                context: name.clone(),
                row: line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(v)) => points.push((line, t, v)),
            _ if idx == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    context: name.clone(),
                    row: line,
                    message: format!("non-numeric cell in '{},{}'", &record[0], &record[1]),
                })
            }
        }
    }
    // Re-map sample indices to file lines so errors point at the offending row.
    let lines: Vec<usize> = points.iter().map(|p| p.0).collect();
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.1, p.2)).collect();
    DriveCycle::from_kmh(name, &pairs).map_err(|e| match e {
        Error::NonMonotoneTime { row } => Error::NonMonotoneTime { row: lines[row] },
        Error::NegativeSpeed { row } => Error::NegativeSpeed { row: lines[row] },
        other => other,
    })
}

/// Longitudinal vehicle parameters, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub mass: f64,
    pub drag_area: f64,
    pub rolling_coeff: f64,
    pub wheel_radius: f64,
    pub gear_ratio: f64,
    pub driveline_eff: f64,
    pub aux_power: f64,
    #[serde(default = "default_air_density")]
    pub air_density: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
}

fn default_air_density() -> f64 {
    1.2
}

fn default_gravity() -> f64 {
    9.81
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mass > 0.0
            && self.wheel_radius > 0.0
            && self.gear_ratio > 0.0
            && self.driveline_eff > 0.0
            && self.driveline_eff <= 1.0
            && self.drag_area >= 0.0
            && self.rolling_coeff >= 0.0
            && self.air_density >= 0.0
            && self.gravity >= 0.0
            && self.aux_power >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "vehicle parameters out of range: {self:?}"
            )))
        }
    }

    /// Tractive force at the wheel in N.
    pub fn road_load(&self, speed: f64, acceleration: f64) -> f64 {
        let aero = 0.5 * self.air_density * self.drag_area * speed * speed;
        let rolling = self.mass * self.gravity * self.rolling_coeff * sign(speed);
        aero + rolling + self.mass * acceleration
    }

    /// Motor shaft speed (rad/s) at a vehicle speed (m/s).
    pub fn motor_speed(&self, speed: f64) -> f64 {
        speed * self.gear_ratio / self.wheel_radius
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Wheel power in W; negative values are recuperation.
pub fn traction_power(speed: f64, acceleration: f64, params: &VehicleParams) -> f64 {
    params.road_load(speed, acceleration) * speed
}

/// Operating point held over one cycle interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimedOperatingPoint {
    pub start: f64,
    pub duration: f64,
    pub wheel_power: f64,
    pub op: OperatingPoint,
}

impl TimedOperatingPoint {
    /// Wheel power reconstructed from shaft power and the driveline efficiency.
    pub fn reconstructed_wheel_power(&self, params: &VehicleParams) -> f64 {
        let shaft = self.op.mechanical_power();
        if shaft >= 0.0 {
            shaft * params.driveline_eff
        } else {
            shaft / params.driveline_eff
        }
    }
}

/// Shaft torque for a wheel force: the driveline efficiency divides traction
/// torque and multiplies recuperation torque.
pub fn shaft_torque(force: f64, params: &VehicleParams) -> f64 {
    let wheel_torque = force * params.wheel_radius;
    if wheel_torque >= 0.0 {
        wheel_torque / (params.gear_ratio * params.driveline_eff)
    } else {
        wheel_torque * params.driveline_eff / params.gear_ratio
    }
}

/// Maps every cycle interval to a motor operating point, using midpoint speed
/// and finite-difference acceleration.
pub fn cycle_operating_points(
    cycle: &DriveCycle,
    params: &VehicleParams,
    motor: &MotorModel,
    dc_voltage: f64,
) -> Result<Vec<TimedOperatingPoint>> {
    params.validate()?;
    if dc_voltage <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dc voltage must be positive, got {dc_voltage}"
        )));
    }
    cycle
        .intervals()
        .map(|iv| {
            let motor_speed = params.motor_speed(iv.speed);
            let (wheel_power, motor_torque) = if iv.speed > 0.0 {
                let force = params.road_load(iv.speed, iv.acceleration);
                (force * iv.speed, shaft_torque(force, params))
            } else {
                (0.0, 0.0)
            };
            let limit = motor.torque_limit(motor_speed);
            if motor_torque.abs() > limit || motor_speed > motor.ratings.max_speed {
                return Err(Error::EnvelopeExceeded {
                    time: iv.start,
                    deficit: motor_torque.abs() - limit,
                });
            }
            let electrical = motor.solve_electrical_state(motor_speed, motor_torque, dc_voltage)?;
            Ok(TimedOperatingPoint {
                start: iv.start,
                duration: iv.duration(),
                wheel_power,
                op: OperatingPoint {
                    motor_speed,
                    motor_torque,
                    electrical,
                    dc_voltage,
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example_params() -> VehicleParams {
        VehicleParams {
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

    #[test]
    fn three_row_trapezoid_distance() {
        let csv = "t_s,v_kmh\n0,0\n1,36\n2,0\n";
        let cycle = read_cycle("tri", csv.as_bytes()).unwrap();
        assert_relative_eq!(cycle.distance(), 10.0, max_relative = 1e-12);
        assert_eq!(cycle.samples().len(), 3);
        assert_relative_eq!(cycle.samples()[1].speed, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn headerless_file_is_accepted() {
        let cycle = read_cycle("x", "0,0\n1,36\n".as_bytes()).unwrap();
        assert_eq!(cycle.samples().len(), 2);
    }

    #[test]
    fn time_going_backwards_is_reported_with_row() {
        let csv = "t_s,v_kmh\n0,0\n5,10\n4,10\n";
        let err = read_cycle("bad", csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneTime { row: 4 }), "{err}");
        assert_eq!(err.to_string(), "non-monotone time at row 4");
    }

    #[test]
    fn negative_speed_rejected() {
        let err = read_cycle("bad", "0,0\n1,-3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NegativeSpeed { row: 2 }));
    }

    #[test]
    fn garbage_cell_rejected() {
        let err = read_cycle("bad", "t,v\n0,0\n1,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
    }

    #[test]
    fn standstill_power_is_zero() {
        assert_eq!(traction_power(0.0, 0.0, &example_params()), 0.0);
    }

    #[test]
    fn cruise_power_hand_value() {
        let v = 27.78;
        let expected = (0.5 * 1.2 * 0.70 * v * v + 2000.0 * 9.81 * 0.010) * v;
        let p = traction_power(v, 0.0, &example_params());
        assert_relative_eq!(p, expected, max_relative = 1e-12);
        assert!((p - 14_450.0).abs() < 10.0, "{p}");
    }

    #[test]
    fn shaft_torque_applies_efficiency_in_both_directions() {
        let p = example_params();
        let t_drive = shaft_torque(1000.0, &p);
        let t_regen = shaft_torque(-1000.0, &p);
        assert_relative_eq!(t_drive, 1000.0 * 0.34 / (10.0 * 0.97));
        assert_relative_eq!(t_regen, -1000.0 * 0.34 * 0.97 / 10.0);
    }
}
