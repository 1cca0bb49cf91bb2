//! Shift-periodic orbits of the ABC flow.
//!
//! The crate integrates the ABC field, shoots for the start height whose
//! trajectory reaches the corner edge of the prism `D`, assembles the
//! resulting orbit with `X(t + t0) = X(t) + (2π, 0, 0)` by reflection,
//! generates its five symmetric partners, and derives drift statistics.
//!
//! `flow` and `integrator` are generic over [`Real`]; the rest is `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod integrator;
pub mod io;
pub mod scalar;
pub mod shooting;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` amplitudes.
pub type Params = flow::FlowParams<f64>;
/// `f64` point.
pub type Point = flow::Point3<f64>;
/// `f64` trajectory.
pub type Traj = integrator::Trajectory<f64>;
/// `f64` integrator settings.
pub type Config = integrator::IntegratorConfig<f64>;
/// `f64` prism.
pub type Prism = flow::PrismRegion<f64>;
