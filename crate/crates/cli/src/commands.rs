//! The four subcommands. Each returns the files it wrote.

use std::path::{Path, PathBuf};

use drivesim_core::economics::{compare_topologies, CycleResult};
use drivesim_core::pipeline::{simulate_cycle, CycleSimulation};
use drivesim_core::topology::{Mode, TopologyKind};
use drivesim_fleet::{cohorts, filter_pipeline, ingest, quartiles, FleetTable, Variable};
use serde::Serialize;

use crate::config::{file_sha256, FleetRun, Loaded, RunConfig};
use crate::error::{Error, Result};
use crate::report::{Provenance, Writer, TOOLKIT, VERSION};
use crate::study::Study;

/// Loss of one cycle sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct LossRow {
    start_s: f64,
    duration_s: f64,
    motor_speed_radps: f64,
    motor_torque_nm: f64,
    modulation_index: f64,
    power_factor: f64,
    phase_current_peak_a: f64,
    mode: Mode,
    inv_sw_w: f64,
    inv_cond_w: f64,
    mot_f_w: f64,
    mot_h_w: f64,
    total_w: f64,
}

fn loss_rows(sim: &CycleSimulation) -> impl Iterator<Item = LossRow> + '_ {
    sim.trace.iter().map(|t| LossRow {
        start_s: t.start,
        duration_s: t.duration,
        motor_speed_radps: t.op.motor_speed,
        motor_torque_nm: t.op.motor_torque,
        modulation_index: t.op.electrical.modulation_index,
        power_factor: t.op.electrical.power_factor,
        phase_current_peak_a: t.op.electrical.phase_current_peak,
        mode: t.loss.mode,
        inv_sw_w: t.loss.inv_sw,
        inv_cond_w: t.loss.inv_cond,
        mot_f_w: t.loss.mot_f,
        mot_h_w: t.loss.mot_h,
        total_w: t.loss.total(),
    })
}

/// Simulates every configured topology concurrently, in `TopologyKind` order.
pub fn simulate_all(study: &Study) -> Result<Vec<CycleSimulation>> {
    let settings = study.run.config.settings();
    std::thread::scope(|s| {
        let handles: Vec<_> = study
            .topologies
            .iter()
            .map(|topo| {
                let settings = &settings;
                s.spawn(move || {
                    simulate_cycle(
                        topo,
                        &study.run.config.vehicle,
                        &study.cycle,
                        &study.motor,
                        settings,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| Ok(h.join().expect("simulation thread panicked")?))
            .collect()
    })
}

#[derive(Serialize)]
struct TopologyResult<'a> {
    topology: TopologyKind,
    cycle: &'a str,
    result: &'a CycleResult,
}

pub fn cmd_simulate(run: Loaded<RunConfig>) -> Result<Vec<PathBuf>> {
    let study = Study::load(run)?;
    let sims = simulate_all(&study)?;
    let mut w = Writer::new(study.run.output_dir(), study.provenance("simulate")?)?;
    for (topo, sim) in study.topologies.iter().zip(&sims) {
        let id = topo.kind.id();
        let doc = TopologyResult {
            topology: topo.kind,
            cycle: study.cycle.name(),
            result: &sim.result,
        };
        w.json(&format!("{id}_result.json"), "simulation", &doc)?;
        w.csv(&format!("{id}_losses.csv"), loss_rows(sim))?;
    }
    Ok(w.finish())
}

#[derive(Serialize)]
struct SizingRow {
    topology: TopologyKind,
    method: String,
    total_chip_area: f64,
    area_delta: Option<f64>,
    added_area_delta: Option<f64>,
    partial_load_factor: Option<f64>,
    binding_constraint: Option<String>,
}

pub fn cmd_size(run: Loaded<RunConfig>) -> Result<Vec<PathBuf>> {
    let study = Study::load(run)?;
    let mut w = Writer::new(study.run.output_dir(), study.provenance("size")?)?;
    w.json("sizing.json", "sizing", &study.sizing)?;
    w.csv(
        "sizing.csv",
        study.sizing.topologies.iter().map(|t| SizingRow {
            topology: t.topology,
            method: t.method.clone(),
            total_chip_area: t.total_chip_area,
            area_delta: t.area_delta,
            added_area_delta: t.added_area_delta,
            partial_load_factor: t.partial_load.as_ref().map(|p| p.partial_load_factor),
            binding_constraint: t
                .partial_load
                .as_ref()
                .and_then(|p| p.binding_constraint)
                .or(t.full_load_binding)
                .map(|c| c.to_string()),
        }),
    )?;
    Ok(w.finish())
}

#[derive(Serialize)]
struct ComparisonDoc<'a> {
    comparison: &'a drivesim_core::economics::CostComparison,
    results: Vec<TopologyResult<'a>>,
    area_delta: Vec<(TopologyKind, Option<f64>)>,
}

pub fn cmd_compare(run: Loaded<RunConfig>) -> Result<Vec<PathBuf>> {
    let study = Study::load(run)?;
    if !study
        .topologies
        .iter()
        .any(|t| t.kind == TopologyKind::B6Sic)
    {
        return Err(Error::config(
            &study.run.path,
            format!(
                "comparison needs a {} baseline topology",
                TopologyKind::B6Sic
            ),
        ));
    }
    let c = &study.run.config;
    let mut ranges = c.ranges.clone();
    ranges.sort_by(f64::total_cmp);
    ranges.dedup();
    let (comparison, results) = compare_topologies(
        &study.topologies,
        &c.vehicle,
        &study.cycle,
        &study.motor,
        &c.settings(),
        c.battery_price,
        &ranges,
    )?;
    let mut w = Writer::new(study.run.output_dir(), study.provenance("compare")?)?;
    let doc = ComparisonDoc {
        comparison: &comparison,
        results: study
            .topologies
            .iter()
            .zip(&results)
            .map(|(t, (_, r))| TopologyResult {
                topology: t.kind,
                cycle: study.cycle.name(),
                result: r,
            })
            .collect(),
        area_delta: study
            .sizing
            .topologies
            .iter()
            .map(|t| (t.topology, t.area_delta))
            .collect(),
    };
    w.json("comparison.json", "comparison", &doc)?;
    w.csv("comparison.csv", comparison.rows.iter())?;
    Ok(w.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FleetReport {
    Correlation,
    Cohorts,
    Quartiles,
}

impl FleetReport {
    pub const ALL: [FleetReport; 3] = [
        FleetReport::Correlation,
        FleetReport::Cohorts,
        FleetReport::Quartiles,
    ];
}

impl std::str::FromStr for FleetReport {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "corr" | "correlation" => Ok(FleetReport::Correlation),
            "cohorts" => Ok(FleetReport::Cohorts),
            "quartiles" => Ok(FleetReport::Quartiles),
            _ => Err(format!(
                "unknown report '{s}' (expected corr, cohorts or quartiles)"
            )),
        }
    }
}

#[derive(Serialize)]
struct LongCell {
    x: Variable,
    y: Variable,
    r: Option<f64>,
    n_used: usize,
    gate: Option<drivesim_fleet::Gate>,
}

#[derive(Serialize)]
struct CohortRow {
    window_start: i32,
    window_end: i32,
    variable: Variable,
    mean: f64,
    std: f64,
    count: usize,
    low_n: bool,
}

#[derive(Serialize)]
struct QuartileRow {
    variable: Variable,
    year: i32,
    n: usize,
    q1: f64,
    median: f64,
    q3: f64,
    whisker_max: f64,
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    records: usize,
    rejected: &'a [drivesim_fleet::Rejection],
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Fleet reports for `dataset`, or the dataset of the fleet config.
pub fn cmd_fleet(
    run: Loaded<FleetRun>,
    dataset: Option<&Path>,
    reports: &[FleetReport],
) -> Result<Vec<PathBuf>> {
    let fleet = &run.config.fleet;
    let dataset = match (dataset, &fleet.dataset) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => run.resolve(d),
        (None, None) => return Err(Error::config(&run.path, "no fleet dataset given")),
    };
    if !dataset.is_file() {
        return Err(Error::config(
            &run.path,
            format!("dataset {} does not exist", dataset.display()),
        ));
    }
    let data = ingest(&dataset)?;
    if data.records.is_empty() {
        return Err(Error::Data {
            path: dataset,
            message: "no valid records".into(),
        });
    }
    let provenance = Provenance {
        toolkit: TOOLKIT,
        version: VERSION,
        command: "fleet".into(),
        config_sha256: run.sha256.clone(),
        inputs: [("dataset".to_string(), file_sha256(&dataset)?)]
            .into_iter()
            .collect(),
        overrides: run.overrides.describe(),
        seed: run.config.seed,
    };
    let mut w = Writer::new(run.output_dir(), provenance)?;
    w.json(
        "ingest.json",
        "ingest",
        &IngestSummary {
            records: data.records.len(),
            rejected: &data.rejected,
        },
    )?;
    let records = &data.records;
    for report in reports {
        match report {
            FleetReport::Correlation => {
                let vars = fleet
                    .variables
                    .clone()
                    .unwrap_or_else(|| Variable::ALL.to_vec());
                let out = filter_pipeline(&FleetTable::new(records, &vars), &fleet.policy);
                let rep = &out.report;
                let surviving = rep.pairs.iter().filter(|p| p.r.is_some()).count();
                if surviving == 0 {
                    log::warn!(
                        "no variable pair survived the filters; the correlation matrix is empty"
                    );
                }
                w.json("correlation.json", "correlation", rep)?;
                let mut header = vec!["variable".to_string()];
                header.extend(vars.iter().map(|v| v.to_string()));
                let rows: Vec<Vec<String>> = vars
                    .iter()
                    .zip(&rep.r_matrix)
                    .map(|(v, row)| {
                        std::iter::once(v.to_string())
                            .chain(row.iter().map(|r| fmt_opt(*r)))
                            .collect()
                    })
                    .collect();
                w.csv_records("correlation_matrix.csv", &header, &rows)?;
                let gate_of = |a: Variable, b: Variable| {
                    rep.pairs
                        .iter()
                        .find(|p| (p.x == a && p.y == b) || (p.x == b && p.y == a))
                        .and_then(|p| p.gate)
                };
                let long = vars
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &x)| vars.iter().enumerate().map(move |(j, &y)| (i, j, x, y)));
                w.csv(
                    "correlation_long.csv",
                    long.map(|(i, j, x, y)| LongCell {
                        x,
                        y,
                        r: rep.r_matrix[i][j],
                        n_used: rep.n_used[i][j],
                        gate: if i == j { None } else { gate_of(x, y) },
                    }),
                )?;
            }
            FleetReport::Cohorts => {
                let stats = cohorts(records, &fleet.windows, &fleet.cohort_variables);
                w.json("cohorts.json", "cohorts", &stats)?;
                w.csv(
                    "cohorts.csv",
                    stats.iter().flat_map(|s| {
                        s.cells.iter().map(move |c| CohortRow {
                            window_start: s.window.0,
                            window_end: s.window.1,
                            variable: c.variable,
                            mean: c.mean,
                            std: c.std,
                            count: c.count,
                            low_n: c.low_n,
                        })
                    }),
                )?;
            }
            FleetReport::Quartiles => {
                let mut years: Vec<i32> = records.iter().map(|r| r.entry_year).collect();
                years.sort_unstable();
                years.dedup();
                let mut rows = Vec::new();
                for &variable in &fleet.quartile_variables {
                    for &year in &years {
                        if let Ok(q) = quartiles(records, variable, year) {
                            rows.push(QuartileRow {
                                variable,
                                year,
                                n: q.n,
                                q1: q.q1,
                                median: q.median,
                                q3: q.q3,
                                whisker_max: q.whisker_max,
                            });
                        }
                    }
                }
                if rows.is_empty() {
                    log::warn!("no model year has enough values for quartiles");
                }
                w.json("quartiles.json", "quartiles", &rows)?;
                w.csv("quartiles.csv", rows.iter())?;
            }
        }
    }
    Ok(w.finish())
}
