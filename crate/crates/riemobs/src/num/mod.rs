//! Low-level numeric support: forward-mode duals, generic small matrices,
//! finite differences, Halton sampling, Runge-Kutta stepping and dense
//! linear-algebra helpers.

pub mod fd;
pub mod gmat;
pub mod halton;
pub mod linalg;
pub mod ode;
pub mod real;

pub use gmat::GMat;
pub use real::{Dual, Real, D1, D2};
