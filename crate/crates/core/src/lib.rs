//! Simulation and analysis of a qubit weak x-basis measurement followed by a
//! strong z-basis measurement with post-selection, plus the miscalibrated
//! strong-detector scenario.
//!
//! * [`qubit`]: 2x2 algebra, states, Bloch vectors, Hermitian eigenpairs.
//! * [`measurement`]: Kraus operators, the Gaussian outcome family, POVM
//!   elements and rotated detectors.
//! * [`simulator`]: seeded, chunked Monte-Carlo record streams.
//! * [`analysis`]: exact outcome tables, post-selection statistics, the
//!   fidelity trade-off and partial tomography.
//! * [`records`]: the `run,k,l` CSV format and histogram export.
//! * [`cli`]: the `weakmeas` command-line front end.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod measurement;
pub mod qubit;
pub mod records;
pub mod simulator;

pub use error::{Error, Result};
