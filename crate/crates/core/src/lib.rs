//! Multiqubit Rydberg Toffoli gates with asymmetric blockade.
//!
//! Control atoms sit on a sphere around a central target. Control-target
//! pairs interact through resonant exchange, control-control pairs through a
//! much weaker vdW shift; an optimizer places the controls to maximize that
//! asymmetry, and a quantum-trajectory engine simulates the resulting
//! C_nNOT pulse program with Rydberg decay and technical noise.

// Validation is written as `!(x > 0.0)` on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod errormodels;
pub mod geometry;
pub mod interactions;
pub mod optimizer;
pub mod physparams;
pub mod seeding;

pub use error::{Error, Result};
