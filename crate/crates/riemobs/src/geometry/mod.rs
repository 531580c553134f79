//! Differential-geometric layer: smooth maps, metric fields, Christoffel
//! symbols, Lie derivatives, second fundamental forms, geodesics and chart
//! transport.

pub mod chart;
pub mod fields;
pub mod geodesic;
pub mod sff;
pub mod tensors;

pub use chart::{invert_map, pushforward_metric, pushforward_vector_field};
pub use fields::{MetricField, OutputPoint, SmoothMap, StatePoint};
pub use geodesic::{
    geodesic_bvp, geodesic_bvp_distance, geodesic_bvp_with_guess, geodesic_ivp,
    grid_distance_2d, Geodesic, InsideFn,
};
pub use sff::{second_fundamental_form, sff_max_norm, transform_sff};
pub use tensors::{
    christoffel, curvature_component, lie_derivative_metric, riemannian_gradient,
    riemannian_hessian, scalar_curvature, ChristoffelTensor,
};
