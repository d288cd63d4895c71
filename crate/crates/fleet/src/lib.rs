//! Statistics over a battery-electric vehicle fleet dataset.

pub mod cohort;
pub mod error;
pub mod filter;
pub mod record;
pub mod stats;

pub use cohort::{cohorts, quartiles, CohortCell, CohortStats, DEFAULT_WINDOWS, LOW_N};
pub use error::{Error, Result};
pub use filter::{
    filter_pipeline, CorrelationReport, FilterOutput, FilterPolicy, FleetTable, Gate, PairLog,
    VariableLog,
};
pub use record::{
    ingest, ingest_reader, Drivetrain, FleetRecord, Ingest, InverterTech, Rejection, Variable,
};
pub use stats::{breusch_pagan, pearson, quartiles_of, shapiro_wilk, Quartiles, TestResult};
