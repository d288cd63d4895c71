//! Drive-cycle co-simulation of traction inverter and motor losses.
//!
//! The crate maps a vehicle speed trace to motor operating points, evaluates
//! inverter conduction and switching losses for two- and three-level
//! topologies, adds fundamental and modulation-induced motor losses, sizes the
//! partial-load switches of multilevel inverters and turns cycle energy
//! differences into battery cost.

pub mod cycle;
pub mod economics;
pub mod error;
pub mod inverter;
pub mod modulation;
pub mod motor;
pub mod operating_point;
pub mod pipeline;
pub mod semiconductor;
pub mod sizing;
pub mod topology;
pub mod trig;

pub use error::{Error, Result};
