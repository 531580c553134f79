//! Metric construction: product metrics from output/complement splittings,
//! the output-flattening modification, reduction to output coordinates, and
//! the oscillator parameter tuner.

pub mod pmod;
pub mod product;
pub mod schur;
pub mod tune;

pub use pmod::p_mod;
pub use product::{build_product_metric, ConstructedMetric, OrthComplementMap};
pub use schur::schur_py;
pub use tune::{
    a2_sufficiency_lhs, pointwise_margins, tune_product_parameters,
    tuning_feasible, OscTuning,
};
