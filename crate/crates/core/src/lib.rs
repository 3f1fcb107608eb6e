//! Knee analysis for M/M/1 performance curves.
//!
//! The response-time curve of an M/M/1 queue is the upper-half branch of a
//! rectangular hyperbola, so its "knee" — the point where response time
//! starts growing faster than load — is not a matter of judgment: it is the
//! hyperbola's vertex, and the latus-rectum endpoints bound a closed knee
//! region around it. This crate provides:
//!
//! * [`mm1`] — closed-form steady-state metrics and the two curve forms
//!   `R(U; S) = S / (1 - U)` and `R(lambda; mu) = 1 / (mu - lambda)`;
//! * [`geometry`] — vertex, focus, latus rectum, knee-region boundaries,
//!   feasibility conditions, and flat/knee/exponential classification;
//! * [`sim`] — a seeded Lindley-recurrence simulator of the M/M/1 queue
//!   used as an empirical oracle for the closed forms;
//! * [`controller`] — a review-period capacity controller that keeps a
//!   measured arrival rate inside the throughput knee region;
//! * [`curve`] — plot-ready curve sampling with exact knee markers.
//!
//! The analytic modules are generic over the scalar type through
//! [`num_traits::Float`]; the aliases below fix the common choices.

pub mod controller;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod mm1;
pub mod sim;

pub use error::{Error, Result};

pub type PointF64 = geometry::Point<f64>;
pub type PointF32 = geometry::Point<f32>;
pub type QueueParametersF64 = mm1::QueueParameters<f64>;
pub type QueueParametersF32 = mm1::QueueParameters<f32>;
pub type SteadyStateMetricsF64 = mm1::SteadyStateMetrics<f64>;
pub type SteadyStateMetricsF32 = mm1::SteadyStateMetrics<f32>;
pub type LoadKneeGeometryF64 = geometry::LoadKneeGeometry<f64>;
pub type LoadKneeGeometryF32 = geometry::LoadKneeGeometry<f32>;
pub type ThroughputKneeGeometryF64 = geometry::ThroughputKneeGeometry<f64>;
pub type ThroughputKneeGeometryF32 = geometry::ThroughputKneeGeometry<f32>;
