//! Coupled plant/observer integration with the gradient correction term.
//!
//! The observer flows along the plant drift plus a correction that descends
//! the output gap: `F = f(xh) - k * P(xh)^-1 dh(xh)^T grad1(h(xh), y)`.
//! Plant and observer are co-integrated with RK4 on the stacked state, and
//! the Riemannian distance between them is recorded along the way.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::conditions::Region;
use crate::error::{Error, Result};
use crate::geometry::{geodesic_bvp_distance, MetricField};
use crate::model::SystemModel;
use crate::num::ode::rk4_step;
use crate::observer::GapFunction;

/// Distance samples below this are treated as exactly zero when forming
/// ratios.
pub const ZERO_DISTANCE_FLOOR: f64 = 1e-12;
/// Halton sample count used to bound metric eigenvalues over a region.
const EIGEN_BOUND_SAMPLES: usize = 256;

/// Observer gain: a positive constant or a positive function of the
/// estimate.
#[derive(Clone)]
pub enum Gain {
    Constant(f64),
    StateDependent(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Gain {
    pub fn at(&self, x: &[f64]) -> f64 {
        match self {
            Gain::Constant(k) => *k,
            Gain::StateDependent(f) => f(x),
        }
    }
}

/// How the run's distance series is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMethod {
    /// Two-point geodesic solve at every recorded sample.
    Geodesic,
    /// Closed form `sqrt(dx^T P dx)`; only valid when the metric is
    /// constant.
    ConstantMetric,
    /// Euclidean norm scaled by metric eigenvalue bounds over the region;
    /// the series stores the upper bound and `lower_bounds` the lower.
    EuclideanBound,
}

/// Integration and certification settings for an observer run.
#[derive(Clone)]
pub struct ObserverConfig {
    pub gain: Gain,
    /// User-asserted basin radius; the initial distance must be below it
    /// when it is provided and computable.
    pub basin_radius: Option<f64>,
    pub dt: f64,
    pub horizon: f64,
    /// Contraction rate the certificate is checked against.
    pub rate_target: f64,
    pub distance: DistanceMethod,
    /// Record a distance sample every this many steps (>= 1).
    pub distance_stride: usize,
}

impl ObserverConfig {
    pub fn new(gain: Gain, dt: f64, horizon: f64, rate_target: f64) -> Self {
        assert!(dt > 0.0, "step must be positive");
        assert!(horizon > 0.0, "horizon must be positive");
        assert!(rate_target >= 0.0);
        if let Gain::Constant(k) = gain {
            assert!(k > 0.0, "gain must be positive");
        }
        Self {
            gain,
            basin_radius: None,
            dt,
            horizon,
            rate_target,
            distance: DistanceMethod::Geodesic,
            distance_stride: 1,
        }
    }

    pub fn with_distance(mut self, method: DistanceMethod) -> Self {
        self.distance = method;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        assert!(stride >= 1);
        self.distance_stride = stride;
        self
    }

    pub fn with_basin_radius(mut self, e: f64) -> Self {
        assert!(e > 0.0);
        self.basin_radius = Some(e);
        self
    }
}

/// Which trajectory left the region first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitActor {
    Plant,
    Observer,
}

/// Truncation record for a run that left the region.
#[derive(Clone, Copy, Debug)]
pub struct RegionExit {
    pub time: f64,
    pub actor: ExitActor,
}

/// Time series of a coupled plant/observer run.
pub struct ObserverRun {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub estimates: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    /// Riemannian distance at the recorded sample times; `None` where the
    /// distance solver did not converge.
    pub distances: Vec<Option<f64>>,
    /// Lower bounds matching `distances` when the method is a sandwich
    /// bound.
    pub lower_bounds: Option<Vec<Option<f64>>>,
    pub method: DistanceMethod,
    /// False iff the plant itself left the region (the guarantee is void).
    pub valid: bool,
    pub exit: Option<RegionExit>,
}

impl ObserverRun {
    /// Indices of samples with a recorded distance.
    pub fn distance_samples(&self) -> Vec<(usize, f64)> {
        self.distances
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|v| (i, v)))
            .collect()
    }
}

/// Observer vector field at estimate `xh` driven by measured output `y`.
pub fn observer_field(
    model: &SystemModel,
    p: &MetricField,
    gap: &GapFunction,
    k_e: f64,
    xh: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    let pinv = p.inverse_at(xh)?;
    let dh = model.output().jacobian(xh);
    let yh = model.output().eval(xh);
    let g1 = DVector::from_vec(gap.grad1(&yh, y));
    let corr = pinv * dh.transpose() * g1;
    let f = model.drift().eval(xh);
    Ok((0..model.state_dim())
        .map(|i| f[i] - k_e * corr[i])
        .collect())
}

/// Eigenvalue bounds of the metric over Halton samples of the region.
fn metric_eigen_bounds(p: &MetricField, region: &Region) -> Result<(f64, f64)> {
    let pts = region.sample(0, EIGEN_BOUND_SAMPLES)?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for pt in &pts {
        let m = p.eval(&pt.0);
        let (lmax, lmin) = crate::num::linalg::sym_eig_extrema(&m);
        lo = lo.min(lmin);
        hi = hi.max(lmax);
    }
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::SingularMetric { pivot: lo, tol: 0.0 });
    }
    Ok((lo, hi))
}

fn constant_metric_distance(m: &DMatrix<f64>, x: &[f64], xh: &[f64]) -> f64 {
    let d = DVector::from_iterator(x.len(), x.iter().zip(xh).map(|(a, b)| a - b));
    (d.transpose() * m * &d)[(0, 0)].max(0.0).sqrt()
}

/// Integrate the coupled system over the configured horizon, recording
/// distances. The run truncates at the first sample outside the region:
/// a plant exit marks the run invalid, an observer exit only flags it.
pub fn simulate(
    model: &SystemModel,
    p: &MetricField,
    gap: &GapFunction,
    cfg: &ObserverConfig,
    region: &Region,
    x0: &[f64],
    xh0: &[f64],
) -> Result<ObserverRun> {
    let n = model.state_dim();
    if x0.len() != n || xh0.len() != n || region.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "simulation initial data".into(),
            expected: n,
            got: x0.len().max(xh0.len()),
        });
    }
    if !region.contains(x0) || !region.contains(xh0) {
        return Err(Error::Config(
            "initial states must lie inside the region".into(),
        ));
    }
    let p0 = p.eval(x0);
    let eig_bounds = match cfg.distance {
        DistanceMethod::EuclideanBound => Some(metric_eigen_bounds(p, region)?),
        _ => None,
    };
    let inside = |z: &[f64]| region.contains(z);
    let distance_at = |x: &[f64], xh: &[f64]| -> (Option<f64>, Option<f64>) {
        match cfg.distance {
            DistanceMethod::Geodesic => (
                geodesic_bvp_distance(p, x, xh, Some(&inside)).ok(),
                None,
            ),
            DistanceMethod::ConstantMetric => {
                (Some(constant_metric_distance(&p0, x, xh)), None)
            }
            DistanceMethod::EuclideanBound => {
                let (lmin, lmax) = eig_bounds.unwrap();
                let e = x
                    .iter()
                    .zip(xh)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (Some(lmax.sqrt() * e), Some(lmin.sqrt() * e))
            }
        }
    };
    let (d0, _) = distance_at(x0, xh0);
    if let (Some(e), Some(d)) = (cfg.basin_radius, d0) {
        if d >= e {
            return Err(Error::Config(format!(
                "initial distance {d} is outside the basin radius {e}"
            )));
        }
    }
    let steps = (cfg.horizon / cfg.dt).round().max(1.0) as usize;
    let rhs = |s: &[f64]| -> Vec<f64> {
        let (x, xh) = s.split_at(n);
        let mut out = model.drift().eval(x);
        let y = model.output().eval(x);
        let k = cfg.gain.at(xh);
        match observer_field(model, p, gap, k, xh, &y) {
            Ok(fh) => out.extend(fh),
            Err(_) => out.extend(std::iter::repeat(f64::NAN).take(n)),
        }
        out
    };
    let mut s: Vec<f64> = x0.iter().chain(xh0.iter()).copied().collect();
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut estimates = vec![xh0.to_vec()];
    let mut outputs = vec![model.output().eval(x0)];
    let mut distances = vec![d0];
    let mut lower_bounds = vec![distance_at(x0, xh0).1];
    let mut valid = true;
    let mut exit = None;
    for step in 1..=steps {
        s = rk4_step(&rhs, &s, cfg.dt);
        let t = step as f64 * cfg.dt;
        let (x, xh) = s.split_at(n);
        let plant_in = region.contains(x) && x.iter().all(|v| v.is_finite());
        let obs_in = region.contains(xh) && xh.iter().all(|v| v.is_finite());
        if !plant_in || !obs_in {
            let actor = if !plant_in {
                ExitActor::Plant
            } else {
                ExitActor::Observer
            };
            valid = actor != ExitActor::Plant;
            exit = Some(RegionExit { time: t, actor });
            break;
        }
        times.push(t);
        states.push(x.to_vec());
        estimates.push(xh.to_vec());
        outputs.push(model.output().eval(x));
        if step % cfg.distance_stride == 0 || step == steps {
            let (d, l) = distance_at(x, xh);
            distances.push(d);
            lower_bounds.push(l);
        } else {
            distances.push(None);
            lower_bounds.push(None);
        }
    }
    let lower = match cfg.distance {
        DistanceMethod::EuclideanBound => Some(lower_bounds),
        _ => None,
    };
    Ok(ObserverRun {
        times,
        states,
        estimates,
        outputs,
        distances,
        lower_bounds: lower,
        method: cfg.distance,
        valid,
        exit,
    })
}
