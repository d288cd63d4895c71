//! Cycle energy per 100 km and its battery-cost equivalent.

use serde::{Deserialize, Serialize};

use crate::cycle::{DriveCycle, VehicleParams};
use crate::error::{Error, Result};
use crate::motor::MotorModel;
use crate::pipeline::{simulate_cycle, SimulationSettings};
use crate::topology::{TopologyConfig, TopologyKind};

const J_PER_KWH: f64 = 3.6e6;

/// Ranges of the default comparison table, km.
pub const DEFAULT_RANGES: [f64; 3] = [300.0, 500.0, 700.0];
/// Default specific battery cost, €/kWh.
pub const DEFAULT_BATTERY_PRICE: f64 = 70.0;

/// Piecewise-linear power over time. Repeated time stamps encode steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    points: Vec<(f64, f64)>,
}

impl PowerSeries {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "power series must be finite".into(),
            ));
        }
        if let Some(k) = points.windows(2).position(|w| w[1].0 < w[0].0) {
            return Err(Error::NonMonotoneTime { row: k + 2 });
        }
        Ok(PowerSeries { points })
    }

    /// Steps holding `power` over `[start, start + duration)`.
    pub fn piecewise_constant(
        intervals: impl IntoIterator<Item = (f64, f64, f64)>,
    ) -> Result<Self> {
        let points = intervals
            .into_iter()
            .flat_map(|(start, duration, power)| [(start, power), (start + duration, power)])
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.0, self.points.last()?.0))
    }

    /// Trapezoidal integral, J.
    pub fn energy(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    }
}

/// Energy normalised to 100 km of the cycle distance, kWh/100 km.
pub fn per_100km(energy_j: f64, distance_m: f64) -> f64 {
    energy_j / J_PER_KWH * (100e3 / distance_m)
}

/// Loss components sampled over a cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleLossSeries {
    pub inv_sw: PowerSeries,
    pub inv_cond: PowerSeries,
    pub mot_f: PowerSeries,
    pub mot_h: PowerSeries,
    /// Time spent in three-level operation, s.
    pub time_3l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub inv_sw: f64,
    pub inv_cond: f64,
    pub mot_f: f64,
    pub mot_h: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.inv_sw + self.inv_cond + self.mot_f + self.mot_h
    }

    /// Component shares of the total.
    pub fn shares(&self) -> Breakdown {
        let t = self.total();
        Breakdown {
            inv_sw: self.inv_sw / t,
            inv_cond: self.inv_cond / t,
            mot_f: self.mot_f / t,
            mot_h: self.mot_h / t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    /// kWh/100 km.
    pub e_loss_per100: f64,
    /// kWh/100 km per mechanism.
    pub breakdown_per100: Breakdown,
    /// Share of cycle time spent in three-level operation.
    pub mode_share_3l: f64,
    pub distance_km: f64,
}

/// Integrates the loss series over the cycle and normalises to 100 km.
pub fn integrate_cycle(losses: &CycleLossSeries, cycle: &DriveCycle) -> Result<CycleResult> {
    let distance = cycle.distance();
    if !(distance > 0.0) {
        return Err(Error::ZeroDistance(cycle.name().to_string()));
    }
    let duration = cycle.duration();
    for series in [
        &losses.inv_sw,
        &losses.inv_cond,
        &losses.mot_f,
        &losses.mot_h,
    ] {
        if let Some((a, b)) = series.span() {
            let tol = 1e-9 * duration.max(1.0);
            if a.abs() > tol || (b - duration).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "loss series spans [{a}, {b}] s, cycle '{}' spans [0, {duration}] s",
                    cycle.name()
                )));
            }
        }
    }
    let norm = |s: &PowerSeries| per_100km(s.energy(), distance);
    let breakdown_per100 = Breakdown {
        inv_sw: norm(&losses.inv_sw),
        inv_cond: norm(&losses.inv_cond),
        mot_f: norm(&losses.mot_f),
        mot_h: norm(&losses.mot_h),
    };
    Ok(CycleResult {
        e_loss_per100: breakdown_per100.total(),
        breakdown_per100,
        mode_share_3l: losses.time_3l / duration,
        distance_km: distance / 1e3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostDelta {
    /// kWh over the whole range.
    pub delta_e_total: f64,
    /// €.
    pub delta_cost: f64,
}

/// Battery energy and cost equivalent of a per-100 km energy difference.
pub fn cost_delta(delta_e_per100: f64, range_km: f64, battery_price: f64) -> Result<CostDelta> {
    if !(range_km > 0.0 && battery_price > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "range ({range_km} km) and battery price ({battery_price} €/kWh) must be positive"
        )));
    }
    let delta_e_total = delta_e_per100 * range_km / 100.0;
    Ok(CostDelta {
        delta_e_total,
        delta_cost: delta_e_total * battery_price,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub topology: String,
    pub range_km: f64,
    pub delta_e_per100: f64,
    pub delta_e_kwh: f64,
    pub delta_cost_eur: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostComparison {
    pub baseline: String,
    pub battery_price: f64,
    pub rows: Vec<CostRow>,
}

/// Cost rows of every result against `baseline`, ordered as given and then
/// by range.
pub fn compare_results(
    results: &[(String, CycleResult)],
    baseline: &str,
    ranges: &[f64],
    battery_price: f64,
) -> Result<CostComparison> {
    let base = results
        .iter()
        .find(|(id, _)| id == baseline)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("baseline {baseline} not among the results"))
        })?
        .1
        .e_loss_per100;
    let mut rows = Vec::with_capacity(results.len() * ranges.len());
    for (id, result) in results {
        let delta = result.e_loss_per100 - base;
        for &range_km in ranges {
            let c = cost_delta(delta, range_km, battery_price)?;
            rows.push(CostRow {
                topology: id.clone(),
                range_km,
                delta_e_per100: delta,
                delta_e_kwh: c.delta_e_total,
                delta_cost_eur: c.delta_cost,
            });
        }
    }
    Ok(CostComparison {
        baseline: baseline.to_string(),
        battery_price,
        rows,
    })
}

/// Simulates every configuration over the cycle (in parallel) and compares
/// them against the SiC two-level bridge.
pub fn compare_topologies(
    configs: &[TopologyConfig],
    vehicle: &VehicleParams,
    cycle: &DriveCycle,
    motor: &MotorModel,
    settings: &SimulationSettings,
    battery_price: f64,
    ranges: &[f64],
) -> Result<(CostComparison, Vec<(String, CycleResult)>)> {
    let results = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|topo| s.spawn(move || simulate_cycle(topo, vehicle, cycle, motor, settings)))
            .collect();
        handles
            .into_iter()
            .zip(configs)
            .map(|(h, topo)| {
                let sim = h.join().expect("simulation thread panicked")?;
                Ok((topo.kind.id().to_string(), sim.result))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let comparison = compare_results(&results, TopologyKind::B6Sic.id(), ranges, battery_price)?;
    Ok((comparison, results))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_integrate_exactly() {
        let s = PowerSeries::piecewise_constant([(0.0, 2.0, 5.0), (2.0, 3.0, -1.0)]).unwrap();
        assert_eq!(s.energy(), 10.0 - 3.0);
    }

    #[test]
    fn series_rejects_time_reversal() {
        assert!(PowerSeries::new(vec![(0.0, 1.0), (2.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn baseline_not_found() {
        assert!(compare_results(&[], "B6_SiC", &DEFAULT_RANGES, 70.0).is_err());
    }
}
