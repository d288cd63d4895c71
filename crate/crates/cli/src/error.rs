use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] drivesim_core::Error),

    #[error(transparent)]
    Fleet(#[from] drivesim_fleet::Error),

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl Error {
    pub fn config(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use drivesim_core::Error as C;
        match self {
            Error::Config { .. } => EXIT_CONFIG,
            Error::Output { .. } => EXIT_OUTPUT,
            Error::Fleet(_) | Error::Data { .. } => EXIT_DATA,
            Error::Core(e) => match e {
                C::InvalidParameter(_) | C::Domain(_) => EXIT_CONFIG,
                C::EnvelopeExceeded { .. }
                | C::OutsideEnvelope { .. }
                | C::VoltageInfeasible { .. }
                | C::InfeasibleMode { .. }
                | C::ThermalRunaway { .. }
                | C::SizingInfeasible { .. }
                | C::NoFeasibleMode { .. } => EXIT_INFEASIBLE,
                C::Io { .. }
                | C::Parse { .. }
                | C::NonMonotoneTime { .. }
                | C::NegativeSpeed { .. }
                | C::ZeroDistance(_)
                | C::OutsideMap { .. } => EXIT_DATA,
            },
        }
    }
}
