//! Numerical toolkit for Riemannian-metric-based observer design.
//!
//! Given a plant `x' = f(x)` with output `y = h(x)` and a candidate metric
//! `P(x)`, the crate checks the two properties that make the
//! gradient-correction observer
//!
//! ```text
//! xhat' = f(xhat) - k_E * P(xhat)^{-1} * dh(xhat)^T * d1_gap(h(xhat), y)
//! ```
//!
//! contract in the Riemannian distance of `P`:
//!
//! * differential detectability: the Lie derivative of `P` along `f` is
//!   negative on the tangent directions of the output fibres, and
//! * geodesic monotonicity: the output gap grows along minimizing geodesics,
//!   certified either through vanishing of a second-fundamental-form tensor
//!   or by direct falsification trials.
//!
//! It also constructs metrics with these properties (product recipe, metric
//! modification), simulates the observer, and certifies distance contraction.
//! A command line front end (`riemobs`) exposes the checkers, the simulator,
//! geodesic utilities and report generation.

pub mod bench;
pub mod cli;
pub mod conditions;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod model;
pub mod num;
pub mod observer;
pub mod tol;

pub use error::{Error, Result};
pub use model::SystemModel;
