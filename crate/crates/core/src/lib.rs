//! Simulation toolkit for monitored random quantum circuits.
//!
//! A monitored circuit interleaves brick-wall layers of Haar-random two-qubit
//! gates with per-qubit computational-basis measurements that fire with rate
//! `p`. This crate provides:
//!
//! - [`circuit`]: the circuit model (layout, measurement configurations,
//!   SU(4) gate sampling, seeded randomness),
//! - [`engine`]: exact dense state-vector simulation with Born weights,
//! - [`percolation`]: the bond-lattice view of a measurement configuration,
//!   crossings, cuts, clusters, and Monte Carlo estimates,
//! - [`dimension`]: the accessible-dimension rank estimator, complexity
//!   bound formulas, and the Clifford lower-bound construction,
//! - [`embedding`]: compiling logical circuits onto measurement-free paths,
//! - [`acceptance`]: the end-to-end verification suite.

pub mod acceptance;
pub mod circuit;
pub mod dimension;
pub mod embedding;
pub mod gates;
pub mod engine;
pub mod error;
pub mod percolation;
pub mod stream;

pub use circuit::{
    BrickwallLayout, CircuitInstance, GateMatrix, MeasurementConfiguration, MeasurementStatus,
    Outcome, Placement, SamplingMode,
};
pub use engine::{BornWeight, StateVector};
pub use error::Error;
pub use stream::StreamKey;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
