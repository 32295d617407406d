//! Numerical geometry of Hormander vector field systems with limited smoothness.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] parses and differentiates coefficient expressions and evaluates truncated jets.
//! * [`fields`] holds vector field systems, iterated commutators, basis selection and
//!   osculating polynomial systems.
//! * [`flows`] integrates flows, quasiexponential maps and the charts built from them.
//! * [`metric`] estimates control distances, connects points and measures metric balls.
//! * [`inequality`] evaluates Poincare, Sobolev and Lagrange type inequalities on balls.
//! * [`cli`] drives everything from the command line and writes CSV/JSON reports.

pub mod cli;
pub mod error;
pub mod expr;
pub mod fields;
pub mod flows;
pub mod inequality;
pub mod linalg;
pub mod metric;
pub mod registry;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
