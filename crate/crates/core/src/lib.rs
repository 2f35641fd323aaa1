//! Finite-difference simulation of a quantum wave packet escaping a
//! two-dimensional billiard through a pair of slits.
//!
//! The crate is organized bottom-up: [`grid`] and [`geometry`] describe the
//! discretized domain, [`packet`] builds the initial state, [`propagator`]
//! advances it in time, [`observables`] records what reaches the screen, and
//! [`analysis`] reduces the records to fringe statistics. [`oracle`] holds
//! independent reference solutions used by the test suite.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod geometry;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod output;
pub mod packet;
pub mod propagator;
pub mod recipes;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{make_grid, ComplexField, GridSpec};
