//! Distributed average tracking for networks of double-integrator agents.
//!
//! Two filter/control-law pairs are provided. [`dynamics::Algorithm::Communication`]
//! needs relative positions and neighbors' filter outputs but no velocity
//! measurements, and relies on matched initialization.
//! [`dynamics::Algorithm::Sensing`] uses relative positions and the agent's
//! own velocity, and needs no communication and no special initialization.
//!
//! The crate covers graph construction and spectra, input-signal generation,
//! closed-loop dynamics, gain synthesis and verification, fixed-step
//! simulation with tracking and Lyapunov diagnostics, and scenario files,
//! trajectory export and SVG plots for the `avgtrack` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod dynamics;
pub mod gains;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod signals;
pub mod sim;

/// A p-dimensional vector (position, velocity, filter variable, ...).
pub type Vector = nalgebra::DVector<f64>;
