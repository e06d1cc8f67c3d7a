//! Numerical laboratory for subordinate Brownian motion.
//!
//! The crate evaluates Bernstein functions and their derived quantities
//! ([`bernstein`]), builds the marginal laws of the subordinator by real-axis
//! Laplace inversion ([`subordinator`]), computes the transition density of
//! the subordinate Brownian motion by two independent routes and checks it
//! against the two-sided envelopes ([`heatkernel`]), and integrates it in time
//! to obtain the Green function ([`green`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod dd;
pub mod error;
pub mod green;
pub mod grid;
pub mod heatkernel;
pub mod invariants;
pub mod laplace;
pub mod quad;
pub mod report;
pub mod rng;
pub mod special;
pub mod subordinator;

pub use bernstein::{BernsteinEval, Family, LaplaceExponentSpec, ScalingReport, ScalingTarget};
pub use error::{Error, Result};
pub use report::BoundCheckReport;
pub use subordinator::SubordinatorLaw;
