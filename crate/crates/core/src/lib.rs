//! Numerical laboratory for differential Harnack inequalities of nonlinear
//! heat equations coupled to Ricci-type flows.
//!
//! The crate integrates the ε-Ricci flow on rotationally symmetric spheres
//! and exact Ricci flows (shrinking round spheres, static flat tori), solves
//! forward and backward nonlinear heat equations with potentials in the log
//! variable `u = -ln f`, and monitors the Harnack quantities, the evolution
//! identities behind them and their integrated (path) forms.

pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod harnack;
pub mod heat;

pub use error::{Error, Result};
