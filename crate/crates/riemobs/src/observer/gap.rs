//! Output gap functions: squared distances on output space used both by
//! the correction term of the observer and by the monotonicity checker.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{MetricField, SmoothMap};
use crate::num::linalg;
use crate::tol::GAP_D2_TOL;

/// Squared output distance `gap(y1, y2)` together with its gradient in the
/// first argument. Two realizations cover the supported output metrics:
///
/// * `ConstantQ`: the metric on output space is a constant SPD matrix `Q`
///   and the squared distance is the quadratic form `(y1-y2)^T Q (y1-y2)`.
/// * `Flat`: a chart `psi` maps outputs to coordinates in which the metric
///   is the identity, so the squared distance is `|psi(y1) - psi(y2)|^2`.
#[derive(Clone)]
pub enum GapFunction {
    ConstantQ { q: DMatrix<f64> },
    Flat { psi: SmoothMap },
}

impl GapFunction {
    /// Constant output metric; `q` must be symmetric positive definite.
    pub fn from_constant(q: DMatrix<f64>) -> Result<Self> {
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) {
            return Err(Error::AsymmetricMetric {
                asym,
                tol: 1e-12 * q.amax().max(1.0),
            });
        }
        linalg::spd_cholesky(&q)?;
        Ok(Self::ConstantQ { q })
    }

    /// Flattening chart: `psi` maps the output space isometrically onto a
    /// Euclidean space.
    pub fn from_output_chart(psi: SmoothMap) -> Self {
        Self::Flat { psi }
    }

    /// Derive a gap from an output metric field by probing it at the given
    /// output points. Only (numerically) constant fields are supported; a
    /// varying field needs an explicit flattening chart instead.
    pub fn try_from_metric(q: &MetricField, probes: &[Vec<f64>]) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::UnsupportedQ {
                detail: "no probe points to establish constancy".into(),
            });
        }
        let q0 = q.eval(&probes[0]);
        let scale = q0.amax().max(1.0);
        for pt in &probes[1..] {
            let qi = q.eval(pt);
            let dev = (&qi - &q0).amax();
            if dev > GAP_D2_TOL * scale {
                return Err(Error::UnsupportedQ {
                    detail: format!(
                        "output metric varies by {dev:.3e} across probes; \
                         provide a flattening chart"
                    ),
                });
            }
        }
        Self::from_constant(q0)
    }

    pub fn eval(&self, y1: &[f64], y2: &[f64]) -> f64 {
        match self {
            Self::ConstantQ { q } => {
                let d = DVector::from_iterator(
                    y1.len(),
                    y1.iter().zip(y2).map(|(a, b)| a - b),
                );
                (d.transpose() * q * &d)[(0, 0)]
            }
            Self::Flat { psi } => {
                let a = psi.eval(y1);
                let b = psi.eval(y2);
                a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum()
            }
        }
    }

    /// Gradient with respect to the first argument.
    pub fn grad1(&self, y1: &[f64], y2: &[f64]) -> Vec<f64> {
        match self {
            Self::ConstantQ { q } => {
                let d = DVector::from_iterator(
                    y1.len(),
                    y1.iter().zip(y2).map(|(a, b)| a - b),
                );
                let g = q * d * 2.0;
                g.iter().cloned().collect()
            }
            Self::Flat { psi } => {
                let a = psi.eval(y1);
                let b = psi.eval(y2);
                let j = psi.jacobian(y1);
                let diff = DVector::from_iterator(
                    a.len(),
                    a.iter().zip(&b).map(|(x, y)| x - y),
                );
                let g = j.transpose() * diff * 2.0;
                g.iter().cloned().collect()
            }
        }
    }

    /// Second derivative in the first argument on the diagonal
    /// `y1 = y2 = y`: equals twice the output metric at `y`.
    pub fn hess1_on_diagonal(&self, y: &[f64]) -> DMatrix<f64> {
        match self {
            Self::ConstantQ { q } => q * 2.0,
            Self::Flat { psi } => {
                let j = psi.jacobian(y);
                (j.transpose() * j) * 2.0
            }
        }
    }
}
