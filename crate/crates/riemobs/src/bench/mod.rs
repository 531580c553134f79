//! Benchmark catalog: ready-made models, metrics, regions, expected
//! condition verdicts and simulation defaults, addressable by name.

mod circle;
mod linear;
mod oscillator;
mod planar;

pub use circle::{
    circle_output, circle_region, default_circle, normalized_field,
    transversality_residual,
};
pub use linear::{default_linear, linear_quadratic, solve_detectability_metric};
pub use oscillator::{
    chain_gramian, complement_weight, correction_direction,
    design_obsmap_weight, harmonic_oscillator, obsmap_metric,
    oscillator_chart_inverse, oscillator_chart_map, oscillator_chart_metric,
    oscillator_model, oscillator_product_metric, oscillator_region,
    product_metric_closed_form, tuned_complement, OBSMAP_THETA,
    OSC_EPSILON_DEFAULT,
};
pub use planar::{default_planar, integral_complement, planar_family};

use crate::conditions::{
    check_a2, check_a3_nullity, check_geodesic_monotonicity_direct,
    check_submersion, ConditionReport, MonotonicityOptions, Region, Verdict,
};
use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::model::SystemModel;
use crate::observer::{DistanceMethod, GapFunction};

/// Condition names accepted by `run_condition`.
pub const CONDITION_NAMES: [&str; 4] =
    ["a2", "a3-nullity", "a3-direct", "submersion"];

/// A candidate metric for a benchmark, together with the output weight it
/// was designed for and the matching output gap function.
#[derive(Clone)]
pub struct NamedMetric {
    pub name: String,
    pub metric: MetricField,
    pub output_weight: MetricField,
    pub gap: GapFunction,
}

/// Expected verdict of one condition check on one named metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub metric: String,
    pub condition: String,
    pub verdict: Verdict,
}

impl Expectation {
    pub fn new(metric: &str, condition: &str, verdict: Verdict) -> Self {
        Self {
            metric: metric.into(),
            condition: condition.into(),
            verdict,
        }
    }
}

/// Default initial data and tuning for simulating the benchmark observer.
#[derive(Clone, Debug)]
pub struct SimDefaults {
    pub x0: Vec<f64>,
    pub xh0: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub gain: f64,
    pub rate_target: f64,
    pub distance: DistanceMethod,
    pub stride: usize,
}

/// A fully assembled benchmark instance.
#[derive(Clone)]
pub struct BenchmarkSpec {
    pub name: String,
    pub description: String,
    pub model: SystemModel,
    pub region: Region,
    pub metrics: Vec<NamedMetric>,
    pub expected: Vec<Expectation>,
    /// Rate floor used when checking the decay condition.
    pub q_min: f64,
    pub sim: Option<SimDefaults>,
}

impl BenchmarkSpec {
    pub fn metric(&self, name: &str) -> Option<&NamedMetric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Run one named condition check on one named metric of a benchmark.
///
/// `tol` is the residual tolerance for the tangency and weight-recovery
/// checks and the falsification threshold for the direct check; the decay
/// check instead uses `q_min` (or the benchmark's own rate floor). For
/// the direct check `samples` counts geodesic trials.
pub fn run_condition(
    bench: &BenchmarkSpec,
    metric: &str,
    condition: &str,
    samples: usize,
    seed: u64,
    tol: f64,
    q_min: Option<f64>,
) -> Result<ConditionReport> {
    let nm = bench.metric(metric).ok_or_else(|| {
        Error::Config(format!(
            "benchmark {:?} has no metric {metric:?}; available: {:?}",
            bench.name,
            bench.metrics.iter().map(|m| m.name.as_str()).collect::<Vec<_>>()
        ))
    })?;
    match condition {
        "a2" => check_a2(
            &bench.model,
            &nm.metric,
            &bench.region,
            samples,
            seed,
            q_min.unwrap_or(bench.q_min),
        ),
        "a3-nullity" => check_a3_nullity(
            &bench.model,
            &nm.metric,
            &nm.output_weight,
            &bench.region,
            samples,
            seed,
            tol,
        ),
        "a3-direct" => check_geodesic_monotonicity_direct(
            &nm.metric,
            &nm.output_weight,
            bench.model.output(),
            &bench.region,
            &MonotonicityOptions::new(samples, seed, tol),
        ),
        "submersion" => check_submersion(
            &nm.metric,
            &nm.output_weight,
            bench.model.output(),
            &bench.region,
            samples,
            seed,
            tol,
        ),
        other => Err(Error::Config(format!(
            "unknown condition {other:?}; available: {CONDITION_NAMES:?}"
        ))),
    }
}

/// Catalog names accepted by `by_name`.
pub fn list_names() -> Vec<&'static str> {
    vec!["linear", "oscillator", "planar", "circle"]
}

/// Build a catalog benchmark by name.
pub fn by_name(name: &str) -> Result<BenchmarkSpec> {
    match name {
        "linear" => Ok(default_linear()),
        "oscillator" => harmonic_oscillator(OSC_EPSILON_DEFAULT),
        "planar" => Ok(default_planar()),
        "circle" => Ok(default_circle()),
        other => Err(Error::Config(format!(
            "unknown benchmark {other:?}; available: {:?}",
            list_names()
        ))),
    }
}
