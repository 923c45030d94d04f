//! Exact and asymptotic waves emitted by an exponentially decaying source,
//! the time at which the exponential signal gives way to an algebraic tail,
//! and a tight-binding lattice that shows the same crossover.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod normalization;
pub mod quad;
pub mod roots;
pub mod selftest;
pub mod source_model;
pub mod specfun;
pub mod transition;
pub mod units;

pub use error::{Error, Result};
