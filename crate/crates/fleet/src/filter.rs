//! Outlier removal, normality and variance-homogeneity gating, and the
//! pairwise correlation matrix.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::record::{FleetRecord, Variable};
use crate::stats::{breusch_pagan, pearson, shapiro_wilk, SHAPIRO_N};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterPolicy {
    pub alpha: f64,
    pub z_cut: f64,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            alpha: 0.05,
            z_cut: 3.0,
        }
    }
}

/// Selected columns of a record set. Raw cells are never modified; the
/// filter marks cells as excluded instead, so its result depends on the raw
/// data alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetTable {
    pub variables: Vec<Variable>,
    /// `raw[v][i]`: value of variable `v` for record `i`.
    pub raw: Vec<Vec<Option<f64>>>,
    pub excluded: Vec<Vec<bool>>,
}

impl FleetTable {
    pub fn new(records: &[FleetRecord], variables: &[Variable]) -> Self {
        let raw: Vec<Vec<Option<f64>>> = variables
            .iter()
            .map(|&v| records.iter().map(|r| r.value(v)).collect())
            .collect();
        let excluded = raw.iter().map(|c| vec![false; c.len()]).collect();
        FleetTable {
            variables: variables.to_vec(),
            raw,
            excluded,
        }
    }

    /// Cell value unless missing or excluded.
    pub fn cell(&self, v: usize, i: usize) -> Option<f64> {
        self.raw[v][i].filter(|_| !self.excluded[v][i])
    }

    pub fn column(&self, v: usize) -> Vec<f64> {
        (0..self.raw[v].len())
            .filter_map(|i| self.cell(v, i))
            .collect()
    }

    /// Complete cases of a variable pair.
    pub fn pair(&self, a: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
        (0..self.raw[a].len())
            .filter_map(|i| Some((self.cell(a, i)?, self.cell(b, i)?)))
            .unzip()
    }
}

/// Why a pair is missing from the reported matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    TooFewCases,
    ZeroVariance,
    NonNormal,
    Heteroscedastic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableLog {
    pub variable: Variable,
    pub n: usize,
    pub outliers_removed: usize,
    /// On the whole cleaned column.
    pub shapiro_p: Option<f64>,
    /// Smallest Breusch-Pagan p over the pairs involving the variable.
    pub bp_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairLog {
    pub x: Variable,
    pub y: Variable,
    pub n_used: usize,
    pub shapiro_p_x: Option<f64>,
    pub shapiro_p_y: Option<f64>,
    /// Smaller p of the two regression directions.
    pub bp_p: Option<f64>,
    pub r: Option<f64>,
    pub gate: Option<Gate>,
    /// Whether the pair would also go if failing variables were dropped as
    /// a whole.
    pub dropped_by_variable_rule: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub variables: Vec<Variable>,
    /// Symmetric; `None` for gated or undefined cells.
    pub r_matrix: Vec<Vec<Option<f64>>>,
    pub n_used: Vec<Vec<usize>>,
    pub filter_log: Vec<VariableLog>,
    pub pairs: Vec<PairLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterOutput {
    pub table: FleetTable,
    pub report: CorrelationReport,
}

/// Marks every cell more than `z_cut` sample standard deviations from its
/// column mean. A single pass over the raw column.
fn outlier_mask(raw: &[Option<f64>], z_cut: f64) -> Vec<bool> {
    let present: Vec<f64> = raw.iter().flatten().copied().collect();
    if present.len() < 2 {
        return vec![false; raw.len()];
    }
    let (m, s) = crate::stats::mean_std(&present);
    raw.iter()
        .map(|v| v.is_some_and(|v| s > 0.0 && ((v - m) / s).abs() > z_cut))
        .collect()
}

fn shapiro_p(x: &[f64]) -> Option<f64> {
    if x.len() < SHAPIRO_N.0 || x.len() > SHAPIRO_N.1 {
        return None;
    }
    shapiro_wilk(x).ok().map(|r| r.p_value)
}

pub fn filter_pipeline(table: &FleetTable, policy: &FilterPolicy) -> FilterOutput {
    let k = table.variables.len();
    let mut table = table.clone();
    table.excluded = table
        .raw
        .iter()
        .map(|c| outlier_mask(c, policy.z_cut))
        .collect();

    let column_p: Vec<Option<f64>> = (0..k).map(|v| shapiro_p(&table.column(v))).collect();
    let normal = |p: Option<f64>| p.is_some_and(|p| p > policy.alpha);

    let mut r_matrix = vec![vec![None; k]; k];
    let mut n_used = vec![vec![0; k]; k];
    let mut pairs = Vec::new();
    for a in 0..k {
        let col = table.column(a);
        n_used[a][a] = col.len();
        if pearson(&col, &col).is_ok() {
            r_matrix[a][a] = Some(1.0);
        }
        for b in a + 1..k {
            let (x, y) = table.pair(a, b);
            let n = x.len();
            let r = pearson(&x, &y);
            let (sx, sy) = (shapiro_p(&x), shapiro_p(&y));
            let bp = [breusch_pagan(&x, &y), breusch_pagan(&y, &x)]
                .into_iter()
                .map(|t| t.ok().map(|t| t.p_value))
                .collect::<Option<Vec<f64>>>()
                .map(|ps| ps.into_iter().fold(f64::INFINITY, f64::min));
            let gate = if n < 4 {
                Some(Gate::TooFewCases)
            } else if matches!(r, Err(Error::ZeroVariance)) || bp.is_none() {
                Some(Gate::ZeroVariance)
            } else if !(normal(sx) && normal(sy)) {
                Some(Gate::NonNormal)
            } else if !normal(bp) {
                Some(Gate::Heteroscedastic)
            } else {
                None
            };
            let r = r.ok();
            n_used[a][b] = n;
            n_used[b][a] = n;
            if gate.is_none() {
                r_matrix[a][b] = r;
                r_matrix[b][a] = r;
            }
            pairs.push(PairLog {
                x: table.variables[a],
                y: table.variables[b],
                n_used: n,
                shapiro_p_x: sx,
                shapiro_p_y: sy,
                bp_p: bp,
                r,
                gate,
                dropped_by_variable_rule: !(normal(column_p[a]) && normal(column_p[b])),
            });
        }
    }

    let filter_log = (0..k)
        .map(|v| {
            let variable = table.variables[v];
            VariableLog {
                variable,
                n: table.column(v).len(),
                outliers_removed: table.excluded[v].iter().filter(|&&e| e).count(),
                shapiro_p: column_p[v],
                bp_p: pairs
                    .iter()
                    .filter(|p| p.x == variable || p.y == variable)
                    .filter_map(|p| p.bp_p)
                    .reduce(f64::min),
            }
        })
        .collect();
    let report = CorrelationReport {
        variables: table.variables.clone(),
        r_matrix,
        n_used,
        filter_log,
        pairs,
    };
    FilterOutput { table, report }
}
