use std::path::PathBuf;

use drivesim_fleet::{
    breusch_pagan, cohorts, filter_pipeline, ingest, pearson, quartiles, shapiro_wilk,
    FilterPolicy, FleetRecord, FleetTable, Gate, Variable, DEFAULT_WINDOWS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde_json::Value;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fleet")
}

fn records() -> Vec<FleetRecord> {
    let out = ingest(&data_dir().join("fixture.csv")).unwrap();
    assert!(out.rejected.is_empty(), "{:?}", out.rejected);
    out.records
}

fn golden() -> Value {
    serde_json::from_str(&std::fs::read_to_string(data_dir().join("golden.json")).unwrap()).unwrap()
}

fn var(v: &Value) -> Variable {
    v.as_str().unwrap().parse().unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// Absolute 1e-9, relative for magnitudes above one.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn pair_values(records: &[FleetRecord], x: Variable, y: Variable) -> (Vec<f64>, Vec<f64>) {
    records
        .iter()
        .filter_map(|r| Some((r.value(x)?, r.value(y)?)))
        .unzip()
}

#[test]
fn fixture_has_forty_records() {
    let r = records();
    assert_eq!(r.len(), 40);
    assert!(r.iter().any(|r| r.tow_kg.is_none()));
}

#[test]
fn cohorts_match_golden() {
    let records = records();
    let g = golden();
    let stats = cohorts(&records, &DEFAULT_WINDOWS, &Variable::ALL);
    let windows = g["cohorts"].as_array().unwrap();
    assert_eq!(stats.len(), windows.len());
    for (s, w) in stats.iter().zip(windows) {
        assert_eq!(s.window.0 as i64, w["window"][0].as_i64().unwrap());
        assert_eq!(s.window.1 as i64, w["window"][1].as_i64().unwrap());
        let cells = w["cells"].as_object().unwrap();
        assert_eq!(s.cells.len(), cells.len());
        for c in &s.cells {
            let e = &cells[c.variable.column()];
            assert_eq!(
                c.count as u64,
                e["count"].as_u64().unwrap(),
                "{:?} {}",
                s.window,
                c.variable
            );
            assert!(
                close(c.mean, num(&e["mean"])),
                "{:?} {} mean {} vs {}",
                s.window,
                c.variable,
                c.mean,
                e["mean"]
            );
            assert!(
                close(c.std, num(&e["std"])),
                "{:?} {} std {} vs {}",
                s.window,
                c.variable,
                c.std,
                e["std"]
            );
            assert_eq!(c.low_n, c.count < 3);
        }
    }
}

#[test]
fn quartiles_match_golden() {
    let records = records();
    for q in golden()["quartiles"].as_array().unwrap() {
        let v = var(&q["variable"]);
        let year = q["year"].as_i64().unwrap() as i32;
        let r = quartiles(&records, v, year).unwrap();
        for (got, key) in [
            (r.q1, "q1"),
            (r.median, "median"),
            (r.q3, "q3"),
            (r.whisker_max, "whisker_max"),
        ] {
            assert!(
                close(got, num(&q[key])),
                "{v} {year} {key}: {got} vs {}",
                q[key]
            );
        }
    }
}

#[test]
fn single_record_window_is_flagged() {
    let records = records();
    let first = records.iter().map(|r| r.entry_year).min().unwrap();
    let s = cohorts(
        &records,
        &[(first, first), (1990, 1995)],
        &[Variable::RangeKm],
    );
    let cell = s[0].cell(Variable::RangeKm).unwrap();
    assert_eq!((cell.count, cell.std, cell.low_n), (1, 0.0, true));
    assert!(s[1].cells.is_empty());
}

#[test]
fn column_statistics_match_golden() {
    let records = records();
    let g = golden();
    for e in g["shapiro"].as_array().unwrap() {
        let v = var(&e["variable"]);
        let x: Vec<f64> = records.iter().filter_map(|r| r.value(v)).collect();
        let r = shapiro_wilk(&x).unwrap();
        assert!((r.statistic - num(&e["w"])).abs() < 1e-6, "{v}");
        assert!(
            (r.p_value - num(&e["p"])).abs() < 1e-6 * num(&e["p"]).max(1e-3),
            "{v}: {} vs {}",
            r.p_value,
            e["p"]
        );
    }
    for e in g["breusch_pagan"].as_array().unwrap() {
        let (x, y) = pair_values(&records, var(&e["x"]), var(&e["y"]));
        assert_eq!(x.len() as u64, e["n"].as_u64().unwrap());
        let r = breusch_pagan(&x, &y).unwrap();
        assert!(
            close(r.statistic, num(&e["lm"])),
            "{} vs {}",
            r.statistic,
            e["lm"]
        );
        assert!(
            (r.p_value - num(&e["p"])).abs() < 1e-9,
            "{} vs {}",
            r.p_value,
            e["p"]
        );
    }
    let pairs = g["pearson"].as_array().unwrap();
    assert!(pairs.len() > 150);
    for e in pairs {
        let (x, y) = pair_values(&records, var(&e["x"]), var(&e["y"]));
        assert_eq!(x.len() as u64, e["n"].as_u64().unwrap());
        let r = pearson(&x, &y).unwrap();
        assert!(
            (r - num(&e["r"])).abs() < 1e-12,
            "{} {}: {r} vs {}",
            e["x"],
            e["y"],
            e["r"]
        );
    }
}

fn golden_filter() -> (Vec<Variable>, FilterPolicy, Value) {
    let f = golden()["filter"].clone();
    let vars = f["variables"].as_array().unwrap().iter().map(var).collect();
    let policy = FilterPolicy {
        alpha: num(&f["alpha"]),
        z_cut: num(&f["z_cut"]),
    };
    (vars, policy, f)
}

#[test]
fn filter_pipeline_matches_golden() {
    let (vars, policy, f) = golden_filter();
    let out = filter_pipeline(&FleetTable::new(&records(), &vars), &policy);
    let rep = &out.report;
    for log in &rep.filter_log {
        let name = log.variable.column();
        assert_eq!(
            log.outliers_removed as u64,
            f["outliers_removed"][name].as_u64().unwrap(),
            "{name}"
        );
        let p = num(&f["column_shapiro_p"][name]);
        assert!(
            (log.shapiro_p.unwrap() - p).abs() < 1e-6 * p.max(1e-3),
            "{name}"
        );
    }
    assert!(
        rep.filter_log
            .iter()
            .map(|l| l.outliers_removed)
            .sum::<usize>()
            > 0
    );
    let expected = f["pairs"].as_array().unwrap();
    assert_eq!(rep.pairs.len(), expected.len());
    for (p, e) in rep.pairs.iter().zip(expected) {
        let label = format!("{} / {}", p.x, p.y);
        assert_eq!((p.x, p.y), (var(&e["x"]), var(&e["y"])));
        assert_eq!(p.n_used as u64, e["n_used"].as_u64().unwrap(), "{label}");
        let gate = e["gate"]
            .as_str()
            .map(|s| serde_json::from_value::<Gate>(Value::String(s.into())).unwrap());
        assert_eq!(p.gate, gate, "{label}");
        assert!((p.r.unwrap() - num(&e["r"])).abs() < 1e-12, "{label}");
        assert!((p.bp_p.unwrap() - num(&e["bp_p"])).abs() < 1e-9, "{label}");
        for (got, key) in [
            (p.shapiro_p_x, "shapiro_p_x"),
            (p.shapiro_p_y, "shapiro_p_y"),
        ] {
            let want = num(&e[key]);
            assert!(
                (got.unwrap() - want).abs() < 1e-6 * want.max(1e-3),
                "{label} {key}"
            );
        }
    }
    let gated = rep.pairs.iter().filter(|p| p.gate.is_some()).count();
    assert!(gated > 0 && gated < rep.pairs.len());
}

#[test]
#[allow(clippy::needless_range_loop)]
fn filter_report_invariants_and_idempotence() {
    let (vars, policy, _) = golden_filter();
    let table = FleetTable::new(&records(), &vars);
    let once = filter_pipeline(&table, &policy);
    let twice = filter_pipeline(&once.table, &policy);
    assert_eq!(once, twice);
    let m = &once.report.r_matrix;
    let k = vars.len();
    for a in 0..k {
        assert_eq!(m[a][a], Some(1.0));
        for b in 0..k {
            assert_eq!(m[a][b], m[b][a]);
            assert_eq!(once.report.n_used[a][b], once.report.n_used[b][a]);
            if let Some(r) = m[a][b] {
                assert!(r.abs() <= 1.0);
            }
        }
    }
    for p in &once.report.pairs {
        let (a, b) = (
            vars.iter().position(|&v| v == p.x).unwrap(),
            vars.iter().position(|&v| v == p.y).unwrap(),
        );
        assert_eq!(m[a][b].is_some(), p.gate.is_none());
    }
}

fn synthetic_table(n: usize, columns: Vec<Vec<f64>>) -> FleetTable {
    let variables = [
        Variable::RangeKm,
        Variable::MassKg,
        Variable::CostEur,
        Variable::MotorPowerKw,
    ];
    FleetTable {
        variables: variables[..columns.len()].to_vec(),
        raw: columns
            .into_iter()
            .map(|c| c.into_iter().map(Some).collect())
            .collect(),
        excluded: vec![vec![false; n]; variables.len()],
    }
}

#[test]
fn gaussian_pairs_are_gated_at_the_combined_test_rate() {
    // each pair faces two normality tests and one variance test at α, so
    // independent Gaussian data is gated with probability 1 − 0.95³
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (n, seeds) = (60, 1000);
    let (mut gated, mut total) = (0usize, 0usize);
    for _ in 0..seeds {
        let cols = (0..4)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let out = filter_pipeline(&synthetic_table(n, cols), &FilterPolicy::default());
        gated += out.report.pairs.iter().filter(|p| p.gate.is_some()).count();
        total += out.report.pairs.len();
    }
    let rate = gated as f64 / total as f64;
    let expected = 1.0 - 0.95f64.powi(3);
    assert!((rate - expected).abs() < 0.025, "{rate} vs {expected}");
}

#[test]
fn heavy_tailed_variable_fails_the_normality_gate() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (n, seeds) = (60, 500);
    let cauchy = Cauchy::new(0.0, 1.0).unwrap();
    let flagged = (0..seeds)
        .filter(|_| {
            let heavy: Vec<f64> = (0..n).map(|_| cauchy.sample(&mut rng)).collect();
            let normal: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let out = filter_pipeline(
                &synthetic_table(n, vec![heavy, normal]),
                &FilterPolicy::default(),
            );
            out.report.pairs[0].gate == Some(Gate::NonNormal)
        })
        .count();
    assert!(flagged as f64 / seeds as f64 >= 0.95, "{flagged}");
}

#[test]
fn sparse_pairs_are_reported_missing() {
    let mut table = synthetic_table(
        10,
        vec![
            (0..10).map(f64::from).collect(),
            (0..10).map(|i| f64::from(i * i)).collect(),
        ],
    );
    for i in 0..7 {
        table.raw[1][i] = None;
    }
    let out = filter_pipeline(&table, &FilterPolicy::default());
    assert_eq!(out.report.pairs[0].gate, Some(Gate::TooFewCases));
    assert_eq!(out.report.r_matrix[0][1], None);
    assert_eq!(out.report.n_used[0][1], 3);
}
