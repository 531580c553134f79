//! Deterministic artifact writers. CSV numbers use 17 significant digits,
//! JSON uses the shortest round-trip representation; identical inputs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionReport, Verdict};
use crate::error::{Error, Result};
use crate::geometry::{Geodesic, MetricField};
use crate::observer::{DistanceMethod, ObserverRun};

/// One float, 17 significant digits, full round trip.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn method_label(m: DistanceMethod) -> &'static str {
    match m {
        DistanceMethod::Geodesic => "geodesic",
        DistanceMethod::ConstantMetric => "constant",
        DistanceMethod::EuclideanBound => "sandwich",
    }
}

/// Aggregated simulation summary written next to the run CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    /// Least-squares decay rate of the recorded distance series.
    pub fitted_rate: Option<f64>,
    /// Rate the contraction certificate was checked against.
    pub rate_target: f64,
    /// Certificate over the recorded run; `None` when it could not be
    /// evaluated (the scan table then explains why).
    pub certificate: Option<ConditionReport>,
    /// Time of the first envelope violation, if any.
    pub first_violation: Option<f64>,
    /// Gain used for the recorded run.
    pub gain: f64,
    /// `(gain, verdict)` over the doubling gain ladder.
    pub gain_scan: Vec<(f64, Verdict)>,
    /// Smallest gain that certified contraction, if any.
    pub chosen_gain: Option<f64>,
    /// Distance method label of the recorded run.
    pub distance_method: String,
}

/// Write the run as `t,x_1..x_n,xhat_1..xhat_n,y_1..y_p,dist,dist_method,
/// valid`; missing distance samples leave the field empty.
pub fn write_run_csv(path: &Path, run: &ObserverRun) -> Result<()> {
    let n = run.states.first().map_or(0, Vec::len);
    let p = run.outputs.first().map_or(0, Vec::len);
    let mut out = String::new();
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",xhat_{i}");
    }
    for i in 1..=p {
        let _ = write!(out, ",y_{i}");
    }
    out.push_str(",dist,dist_method,valid\n");
    let label = method_label(run.method);
    for k in 0..run.times.len() {
        out.push_str(&csv_float(run.times[k]));
        for v in &run.states[k] {
            out.push(',');
            out.push_str(&csv_float(*v));
        }
        for v in &run.estimates[k] {
            out.push(',');
            out.push_str(&csv_float(*v));
        }
        for v in &run.outputs[k] {
            out.push(',');
            out.push_str(&csv_float(*v));
        }
        out.push(',');
        if let Some(d) = run.distances[k] {
            out.push_str(&csv_float(d));
        }
        let _ = write!(out, ",{label},{}\n", run.valid);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write a geodesic as `s,x_1..x_n,speed` with the pointwise speed
/// `sqrt(v^T P(x) v)`.
pub fn write_geodesic_csv(
    path: &Path,
    p: &MetricField,
    g: &Geodesic,
) -> Result<()> {
    let n = p.dim();
    let mut out = String::from("s");
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",speed\n");
    for k in 0..g.s.len() {
        out.push_str(&csv_float(g.s[k]));
        for v in &g.points[k] {
            out.push(',');
            out.push_str(&csv_float(*v));
        }
        let pm = p.eval(&g.points[k]);
        let v = nalgebra::DVector::from_row_slice(&g.velocities[k]);
        let speed = (v.transpose() * pm * &v)[(0, 0)].max(0.0).sqrt();
        out.push(',');
        out.push_str(&csv_float(speed));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Two space-separated columns `t dist` for plotting decay; samples
/// without a recorded distance are skipped.
pub fn write_dist_dat(path: &Path, times: &[f64], dists: &[Option<f64>]) -> Result<()> {
    let mut out = String::new();
    for (t, d) in times.iter().zip(dists) {
        if let Some(d) = d {
            let _ = writeln!(out, "{} {}", csv_float(*t), csv_float(*d));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Parse `t` and `dist` back out of a run CSV (for report aggregation).
pub fn read_run_distances(path: &Path) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::MissingArtifacts {
        detail: format!("{} is empty", path.display()),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    let dist_idx = cols.iter().position(|c| *c == "dist").ok_or_else(|| {
        Error::MissingArtifacts {
            detail: format!("{} has no dist column", path.display()),
        }
    })?;
    let mut times = Vec::new();
    let mut dists = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let t: f64 = fields[0].parse().map_err(|_| Error::MissingArtifacts {
            detail: format!("{}: malformed time field", path.display()),
        })?;
        times.push(t);
        let d = fields.get(dist_idx).and_then(|f| f.parse::<f64>().ok());
        dists.push(d);
    }
    Ok((times, dists))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip_through_17_digits() {
        for x in [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-15, -273.15] {
            let s = csv_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn run_csv_round_trips_times_and_distances() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        let run = ObserverRun {
            times: vec![0.0, 0.1, 0.2],
            states: vec![vec![1.0, 2.0]; 3],
            estimates: vec![vec![1.5, 2.5]; 3],
            outputs: vec![vec![1.0]; 3],
            distances: vec![Some(0.5), None, Some(0.3)],
            lower_bounds: None,
            method: DistanceMethod::ConstantMetric,
            valid: true,
            exit: None,
        };
        write_run_csv(&path, &run).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,x_1,x_2,xhat_1,xhat_2,y_1,dist,dist_method,valid\n"));
        assert!(text.ends_with('\n'));
        let (times, dists) = read_run_distances(&path).unwrap();
        assert_eq!(times, run.times);
        assert_eq!(dists, run.distances);
    }
}
