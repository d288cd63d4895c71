//! Configuration, subcommands and report files of the `drivesim` tool.

pub mod calibration;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod study;

pub use commands::{cmd_compare, cmd_fleet, cmd_simulate, cmd_size, FleetReport};
pub use config::{
    DeviceLibrary, FleetConfig, FleetRun, Loaded, Overrides, RunConfig, TopologySpec,
};
pub use error::{Error, Result};
pub use study::{size_topologies, SizingReport, Study, TopologySizing};
