//! Five-year cohort statistics and per-year quartiles.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::record::{FleetRecord, Variable};
use crate::stats::{mean_std, quartiles_of, Quartiles};

pub const DEFAULT_WINDOWS: [(i32, i32); 3] = [(2010, 2014), (2015, 2019), (2020, 2025)];

/// Cells with fewer values are flagged.
pub const LOW_N: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortCell {
    pub variable: Variable,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    pub count: usize,
    pub low_n: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    /// Inclusive model-year window.
    pub window: (i32, i32),
    /// Variables without any value in the window are omitted.
    pub cells: Vec<CohortCell>,
}

impl CohortStats {
    pub fn cell(&self, v: Variable) -> Option<&CohortCell> {
        self.cells.iter().find(|c| c.variable == v)
    }
}

pub fn cohorts(
    records: &[FleetRecord],
    windows: &[(i32, i32)],
    variables: &[Variable],
) -> Vec<CohortStats> {
    windows
        .iter()
        .map(|&(start, end)| {
            let members: Vec<&FleetRecord> = records
                .iter()
                .filter(|r| (start..=end).contains(&r.entry_year))
                .collect();
            let cells = variables
                .iter()
                .filter_map(|&variable| {
                    let values: Vec<f64> =
                        members.iter().filter_map(|r| r.value(variable)).collect();
                    if values.is_empty() {
                        return None;
                    }
                    let (mean, std) = mean_std(&values);
                    Some(CohortCell {
                        variable,
                        mean,
                        std,
                        count: values.len(),
                        low_n: values.len() < LOW_N,
                    })
                })
                .collect();
            CohortStats {
                window: (start, end),
                cells,
            }
        })
        .collect()
}

/// Quartiles of one variable over the models entering in `year`.
pub fn quartiles(records: &[FleetRecord], variable: Variable, year: i32) -> Result<Quartiles> {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.entry_year == year)
        .filter_map(|r| r.value(variable))
        .collect();
    quartiles_of(&values)
}
