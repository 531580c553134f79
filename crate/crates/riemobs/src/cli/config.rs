//! Job configuration: a single JSON document validated before any
//! computation. Unknown keys are rejected. Command-line flags overlay the
//! file; every numeric default lives in the constants below.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::bench::{linear_quadratic, by_name, BenchmarkSpec};
use crate::error::{Error, Result};

/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 0;
/// Default number of region samples per condition check.
pub const DEFAULT_SAMPLES: usize = 128;
/// Default residual tolerance for tangency and weight-recovery checks.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default number of random endpoint pairs for the direct monotonicity
/// check.
pub const DEFAULT_DIRECT_TRIALS: usize = 200;
/// Default output directory.
pub const DEFAULT_OUT: &str = "out";
/// Default affine-parameter span for velocity-specified geodesics.
pub const DEFAULT_GEODESIC_SPAN: f64 = 1.0;


#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Catalog benchmark name; mutually exclusive with `linear`.
    pub benchmark: Option<String>,
    /// Inline linear model: constant matrices, the one family that is
    /// exactly representable as plain data.
    pub linear: Option<LinearSpec>,
    /// Metric name within the benchmark; optional when there is only one.
    pub metric: Option<String>,
    /// Conditions for the check command.
    #[serde(default)]
    pub conditions: Vec<String>,
    pub sampling: Option<SamplingSpec>,
    /// Residual tolerance override for tangency / weight-recovery checks.
    pub tolerance: Option<f64>,
    /// Rate floor override for the decay check.
    pub q_min: Option<f64>,
    pub simulation: Option<SimulationSpec>,
    pub geodesic: Option<GeodesicSpec>,
    /// Output directory for artifacts.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    /// Drift matrix, row-major.
    pub drift: Vec<Vec<f64>>,
    /// Output matrix, row-major.
    pub output: Vec<Vec<f64>>,
    /// Constant metric matrix, row-major.
    pub metric: Vec<Vec<f64>>,
    /// Constant output weight, row-major.
    pub output_weight: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub seed: Option<u64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub x0: Option<Vec<f64>>,
    pub xh0: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub gain: Option<GainSpec>,
    pub rate_target: Option<f64>,
    /// Distance method: "geodesic", "constant" or "sandwich".
    pub distance: Option<String>,
    pub stride: Option<usize>,
    pub basin_radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "policy", rename_all = "lowercase")]
pub enum GainSpec {
    /// Use this gain for the recorded run.
    Fixed { value: f64 },
    /// Record the run at the smallest gain that certifies contraction.
    Scan,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    pub from: Vec<f64>,
    /// Second endpoint (boundary-value solve); mutually exclusive with
    /// `velocity`.
    pub to: Option<Vec<f64>>,
    /// Initial velocity (initial-value integration).
    pub velocity: Option<Vec<f64>>,
    /// Affine-parameter span for velocity-specified curves.
    pub span: Option<f64>,
}

/// Command-line overlays for the global flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub benchmark: Option<String>,
    pub metric: Option<String>,
    pub conditions: Vec<String>,
}

impl JobConfig {
    /// Parse a config file, reporting JSON syntax and unknown-key errors
    /// with line/column diagnostics.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {e}", path.display()))
        })
    }

    /// Fold command-line flags into the config; flags win.
    pub fn apply(&mut self, ov: &Overrides) {
        if ov.seed.is_some() || ov.samples.is_some() {
            let s = self.sampling.get_or_insert_with(SamplingSpec::default);
            if ov.seed.is_some() {
                s.seed = ov.seed;
            }
            if ov.samples.is_some() {
                s.count = ov.samples;
            }
        }
        if let Some(t) = ov.tol {
            self.tolerance = Some(t);
        }
        if let Some(o) = &ov.out {
            self.out = Some(o.clone());
        }
        if let Some(b) = &ov.benchmark {
            self.benchmark = Some(b.clone());
        }
        if let Some(m) = &ov.metric {
            self.metric = Some(m.clone());
        }
        if !ov.conditions.is_empty() {
            self.conditions = ov.conditions.clone();
        }
    }

    pub fn seed(&self) -> u64 {
        self.sampling.and_then(|s| s.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn samples(&self) -> usize {
        self.sampling
            .and_then(|s| s.count)
            .unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOL)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Materialize the benchmark this job refers to.
    pub fn resolve_benchmark(&self) -> Result<BenchmarkSpec> {
        match (&self.benchmark, &self.linear) {
            (Some(name), None) => by_name(name),
            (None, Some(lin)) => {
                let a = matrix_from_rows(&lin.drift, "linear.drift")?;
                let h = matrix_from_rows(&lin.output, "linear.output")?;
                let p = matrix_from_rows(&lin.metric, "linear.metric")?;
                let q = matrix_from_rows(
                    &lin.output_weight,
                    "linear.output_weight",
                )?;
                linear_quadratic(a, h, p, q)
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "give either `benchmark` or `linear`, not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "config names no model: set `benchmark` or `linear`".into(),
            )),
        }
    }

    /// Index of the requested metric within the benchmark. Unambiguous
    /// when the benchmark carries a single metric; otherwise the name is
    /// required.
    pub fn resolve_metric(&self, bench: &BenchmarkSpec) -> Result<usize> {
        match &self.metric {
            Some(name) => bench
                .metrics
                .iter()
                .position(|m| &m.name == name)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "benchmark {:?} has no metric {name:?}; available: {:?}",
                        bench.name,
                        bench
                            .metrics
                            .iter()
                            .map(|m| m.name.as_str())
                            .collect::<Vec<_>>()
                    ))
                }),
            None if bench.metrics.len() == 1 => Ok(0),
            None => Err(Error::Config(format!(
                "benchmark {:?} has several metrics, name one of {:?}",
                bench.name,
                bench
                    .metrics
                    .iter()
                    .map(|m| m.name.as_str())
                    .collect::<Vec<_>>()
            ))),
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Config(format!("{what}: empty matrix")));
    }
    let cols = rows[0].len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(format!(
            "{what}: rows must be nonempty and of equal length"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_with_a_diagnostic() {
        let err = serde_json::from_str::<JobConfig>(
            r#"{"benchmark": "linear", "bogus": 1}"#,
        )
        .err()
        .expect("unknown key should fail");
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn flags_overlay_the_file_values() {
        let mut cfg: JobConfig =
            serde_json::from_str(r#"{"benchmark": "linear", "sampling": {"seed": 7}}"#)
                .unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            samples: Some(32),
            tol: Some(1e-4),
            ..Default::default()
        });
        assert_eq!(cfg.seed(), 9);
        assert_eq!(cfg.samples(), 32);
        assert_eq!(cfg.tolerance(), 1e-4);
    }

    #[test]
    fn model_choice_must_be_unambiguous() {
        let cfg = JobConfig::default();
        assert!(matches!(
            cfg.resolve_benchmark(),
            Err(Error::Config(_))
        ));
        let cfg: JobConfig = serde_json::from_str(
            r#"{"benchmark": "linear",
                "linear": {"drift": [[0.0]], "output": [[1.0]],
                           "metric": [[1.0]], "output_weight": [[1.0]]}}"#,
        )
        .unwrap();
        assert!(matches!(
            cfg.resolve_benchmark(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn inline_linear_model_builds() {
        let cfg: JobConfig = serde_json::from_str(
            r#"{"linear": {"drift": [[0.0, 1.0], [0.0, 0.0]],
                           "output": [[1.0, 0.0]],
                           "metric": [[3.0, -3.0], [-3.0, 6.0]],
                           "output_weight": [[1.0]]}}"#,
        )
        .unwrap();
        let bench = cfg.resolve_benchmark().unwrap();
        assert_eq!(bench.model.state_dim(), 2);
        assert_eq!(cfg.resolve_metric(&bench).unwrap(), 0);
    }

    #[test]
    fn metric_name_is_required_when_ambiguous() {
        let bench = by_name("oscillator").unwrap();
        let cfg = JobConfig {
            benchmark: Some("oscillator".into()),
            ..Default::default()
        };
        assert!(matches!(
            cfg.resolve_metric(&bench),
            Err(Error::Config(_))
        ));
        let cfg = JobConfig {
            benchmark: Some("oscillator".into()),
            metric: Some("product".into()),
            ..Default::default()
        };
        assert!(cfg.resolve_metric(&bench).is_ok());
    }
}
