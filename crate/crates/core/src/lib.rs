//! Stabilizing weight functionals over random point measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`point_process`] samples homogeneous/inhomogeneous Poisson and binomial
//!   point sets (optionally marked) with reproducible per-replication streams.
//! * [`geometry`] builds the spatial index and the graphs the functionals are
//!   defined on: k-nearest neighbours, Delaunay/Voronoi (planar) and the
//!   sphere-of-influence graph.
//! * [`functionals`] evaluates weights `ξ(x; X)` and the derived point
//!   measures, total masses and add-one costs.
//! * [`estimators`] estimates the limit ingredients (`E ξ(0; P_τ)`, `V(τ)`,
//!   `D(τ)`, stabilization tails, pair correlations) by Monte Carlo.
//! * [`harness`] turns those ingredients into limiting mean/variance/covariance
//!   predictions and compares them with replicated experiments.
//! * [`cli`] is the command-line front end (`geoprob`).

pub mod cli;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod point_process;
pub(crate) mod util;

pub use error::{Error, Result};
pub use point_process::{DensityField, Mark, Point, PointSet, RngStream, Window};
