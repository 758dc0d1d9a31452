//! Adaptive network sampling of rare, clustered populations.
//!
//! * [`popgraph`]: populations of units, case networks and contact edges.
//! * [`design`]: initial samples and wave-by-wave tracing.
//! * [`inclusion`]: first- and second-order inclusion probabilities.
//! * [`estimate`]: Horvitz-Thompson totals and change estimators.
//! * [`mc`]: seeded, parallel Monte Carlo evaluation of designs.
//! * [`oracle`]: exhaustive enumeration checks on toy populations.

pub mod design;
pub mod error;
pub mod estimate;
pub mod inclusion;
pub mod mc;
pub mod oracle;
pub mod popgraph;
pub mod seed;
pub mod sets;

pub use error::{Error, Result};
