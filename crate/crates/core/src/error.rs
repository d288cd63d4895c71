use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: row {row}: {message}")]
    Parse {
        context: String,
        row: usize,
        message: String,
    },

    #[error("non-monotone time at row {row}")]
    NonMonotoneTime { row: usize },

    #[error("negative speed at row {row}")]
    NegativeSpeed { row: usize },

    #[error("cycle '{0}' covers zero distance")]
    ZeroDistance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("torque demand exceeds motor envelope at t = {time} s by {deficit:.3} N·m")]
    EnvelopeExceeded { time: f64, deficit: f64 },

    #[error(
        "operating point (speed {speed:.3} rad/s, torque {torque:.3} N·m) outside motor envelope \
         (speed margin {speed_margin:.3} rad/s, torque margin {torque_margin:.3} N·m)"
    )]
    OutsideEnvelope {
        speed: f64,
        torque: f64,
        speed_margin: f64,
        torque_margin: f64,
    },

    #[error("query (speed {speed:.3} rad/s, torque {torque:.3} N·m) outside the map hull")]
    OutsideMap { speed: f64, torque: f64 },

    #[error(
        "operating point (speed {speed:.3} rad/s, torque {torque:.3} N·m) is voltage-infeasible at {u_dc} V"
    )]
    VoltageInfeasible { speed: f64, torque: f64, u_dc: f64 },

    #[error("{mode} operation is not available for topology {topology}")]
    InfeasibleMode { topology: String, mode: String },

    #[error("electro-thermal loop diverged for role {role} (last estimate {temperature:.1} °C)")]
    ThermalRunaway { role: String, temperature: f64 },

    #[error("sizing infeasible for {target}: {constraint} constraint violated at the maximum area bound")]
    SizingInfeasible { target: String, constraint: String },

    #[error("{topology}: no feasible operating mode at t = {time} s ({constraint})")]
    NoFeasibleMode {
        topology: String,
        time: f64,
        constraint: String,
    },
}
