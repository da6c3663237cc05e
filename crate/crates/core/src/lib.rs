//! Age of information in a two-way relay network where the relay harvests
//! its transmit energy from the uplink signals and every packet is a short
//! finite-blocklength code.
//!
//! [`analytic`] gives closed-form and quadrature-based error probabilities
//! and average ages, [`mcsim`] simulates the same system cycle by cycle,
//! and [`sweep`] drives both over parameter grids.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod fbl;
pub mod mcsim;
pub mod quad;
pub mod sweep;
pub mod validation;

pub use analytic::{analytic_report, exact_report, Age, AoiReport, GcqSettings, Method};
pub use config::{Scenario, Source, SystemConfig};
pub use error::{Error, Result};
