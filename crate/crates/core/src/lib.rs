//! Exact simulation of the two-oracle-call quantum gradient estimator.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`model`]: objective functions with certified gradient and Hessian bounds.
//! * [`oracle`]: fixed-point range registers, domain labels and the function oracle.
//! * [`grid`], [`sparse`], [`gates`]: the simulation substrate (dense grid
//!   register, sparse tripartite basis tracking, gate-level circuits).
//! * [`pipeline`]: the seven-operator algorithm, gradient decoding and sampling.
//! * [`analysis`]: parameter planning, the error decomposition and every
//!   bound used to guarantee success, plus a classical finite-difference baseline.

pub mod analysis;
pub mod error;
pub mod gates;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod params;
pub mod pipeline;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64;
