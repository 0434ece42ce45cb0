//! Path planning on a cognitive map: a self-organizing network learns the
//! reachable configuration space, a voxel lookup table turns obstacles into
//! blocked neurons, and graph search plus spline smoothing yields the motion.
//! Sampling planners, a dataset generator and a live replanning simulator
//! come along for comparison and demonstration.

// `!(a < b)` checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod grid;
pub mod kinematics;

pub use error::{Error, Result};
pub mod baselines;
pub mod bitmap;
pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod io;
pub mod live;
pub mod lut;
pub mod obstacles;
pub mod planner;
pub mod scenario;
pub mod sonn;
