//! Smooth maps and metric fields.
//!
//! A field is stored as up to three evaluation closures for the scalar
//! levels `f64`, [`D1`] and [`D2`]. When the dual levels are present (the
//! normal case for hand-written expressions, via the [`smooth_map!`] and
//! [`metric_field!`] macros) all derivatives are exact; otherwise central
//! finite differences with step `FD_STEP * (1 + |x_c|)` are used.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::num::fd;
use crate::num::gmat::GMat;
use crate::num::linalg;
use crate::num::real::{seed_d1, seed_d2, seed_outer, Real, D1, D2};
use crate::tol::{HESSIAN_SYM_TOL, METRIC_SYM_TOL};

/// Point in state space. Thin wrapper used where dimensions should be
/// explicit in signatures and reports.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePoint(pub Vec<f64>);

/// Point in output space.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPoint(pub Vec<f64>);

impl StatePoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl OutputPoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

pub type EvalF64 = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type EvalD1 = Arc<dyn Fn(&[D1]) -> Vec<D1> + Send + Sync>;
pub type EvalD2 = Arc<dyn Fn(&[D2]) -> Vec<D2> + Send + Sync>;

/// Smooth map between coordinate spaces with evaluation, jacobian and
/// per-component hessians.
#[derive(Clone)]
pub struct SmoothMap {
    n_in: usize,
    n_out: usize,
    f0: EvalF64,
    f1: Option<EvalD1>,
    f2: Option<EvalD2>,
}

impl SmoothMap {
    pub fn from_levels(
        n_in: usize,
        n_out: usize,
        f0: EvalF64,
        f1: Option<EvalD1>,
        f2: Option<EvalD2>,
    ) -> Self {
        Self {
            n_in,
            n_out,
            f0,
            f1,
            f2,
        }
    }

    /// Map available only at `f64` precision; derivatives fall back to
    /// central differences.
    pub fn from_f64(n_in: usize, n_out: usize, f0: EvalF64) -> Self {
        Self {
            n_in,
            n_out,
            f0,
            f1: None,
            f2: None,
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn has_exact_derivatives(&self) -> bool {
        self.f1.is_some() && self.f2.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_in);
        let out = (self.f0)(x);
        debug_assert_eq!(out.len(), self.n_out);
        out
    }

    /// Raw first-order dual evaluation, when the map carries that level.
    /// Lets callers embed this map inside larger differentiated
    /// expressions without falling back to finite differences.
    pub fn eval_d1(&self, x: &[D1]) -> Option<Vec<D1>> {
        self.f1.as_ref().map(|f| f(x))
    }

    /// Raw second-order dual evaluation, when the map carries that level.
    pub fn eval_d2(&self, x: &[D2]) -> Option<Vec<D2>> {
        self.f2.as_ref().map(|f| f(x))
    }

    /// Jacobian, `n_out x n_in`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        debug_assert_eq!(x.len(), self.n_in);
        let mut j = DMatrix::zeros(self.n_out, self.n_in);
        if let Some(f1) = &self.f1 {
            for c in 0..self.n_in {
                let out = f1(&seed_d1(x, c));
                for r in 0..self.n_out {
                    j[(r, c)] = out[r].du;
                }
            }
        } else {
            let flat = fd::jacobian(&|y| (self.f0)(y), x, self.n_out);
            for r in 0..self.n_out {
                for c in 0..self.n_in {
                    j[(r, c)] = flat[r * self.n_in + c];
                }
            }
        }
        j
    }

    /// Jacobian with first-order dual entries, used when assembling metric
    /// expressions that must themselves be differentiable once more.
    /// Requires the second-order evaluation level.
    pub(crate) fn jacobian_d1(&self, x: &[D1]) -> Option<GMat<D1>> {
        let f2 = self.f2.as_ref()?;
        let mut j = GMat::zeros(self.n_out, self.n_in);
        for c in 0..self.n_in {
            let out = f2(&seed_outer(x, c));
            for r in 0..self.n_out {
                j.set(r, c, out[r].du);
            }
        }
        Some(j)
    }

    /// Hessian of component `i`, `n_in x n_in`. Every entry is computed
    /// independently so the symmetry of the result is a genuine check on the
    /// differentiation path, not an artifact of mirroring.
    pub fn hessian_component(&self, i: usize, x: &[f64]) -> DMatrix<f64> {
        debug_assert!(i < self.n_out);
        let n = self.n_in;
        let mut h = DMatrix::zeros(n, n);
        if let Some(f2) = &self.f2 {
            for a in 0..n {
                for b in 0..n {
                    let out = f2(&seed_d2(x, a, b));
                    h[(a, b)] = out[i].du.du;
                }
            }
        } else {
            for a in 0..n {
                for b in 0..n {
                    h[(a, b)] = fd::second_deriv(&|y| (self.f0)(y), x, i, a, b);
                }
            }
        }
        debug_assert!(
            (&h - h.transpose()).amax() <= HESSIAN_SYM_TOL * (1.0 + h.amax()),
            "hessian asymmetry beyond tolerance"
        );
        h
    }

    /// Composition `self ∘ inner`, exact at the levels both maps provide.
    pub fn compose(outer: &SmoothMap, inner: &SmoothMap) -> SmoothMap {
        assert_eq!(inner.n_out, outer.n_in, "composition dimension mismatch");
        let o0 = outer.f0.clone();
        let i0 = inner.f0.clone();
        let f1 = match (outer.f1.clone(), inner.f1.clone()) {
            (Some(of), Some(inf)) => Some(Arc::new(move |x: &[D1]| of(&inf(x))) as EvalD1),
            _ => None,
        };
        let f2 = match (outer.f2.clone(), inner.f2.clone()) {
            (Some(of), Some(inf)) => Some(Arc::new(move |x: &[D2]| of(&inf(x))) as EvalD2),
            _ => None,
        };
        SmoothMap {
            n_in: inner.n_in,
            n_out: outer.n_out,
            f0: Arc::new(move |x| o0(&i0(x))),
            f1,
            f2,
        }
    }
}

pub type MEvalF64 = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MEvalD1 = Arc<dyn Fn(&[D1]) -> Vec<D1> + Send + Sync>;
pub type MEvalD2 = Arc<dyn Fn(&[D2]) -> Vec<D2> + Send + Sync>;

/// Field of symmetric positive definite matrices (row-major flattened).
#[derive(Clone)]
pub struct MetricField {
    n: usize,
    m0: MEvalF64,
    m1: Option<MEvalD1>,
    m2: Option<MEvalD2>,
}

impl MetricField {
    pub fn from_levels(
        n: usize,
        m0: MEvalF64,
        m1: Option<MEvalD1>,
        m2: Option<MEvalD2>,
    ) -> Self {
        Self { n, m0, m1, m2 }
    }

    pub fn from_f64(n: usize, m0: MEvalF64) -> Self {
        Self {
            n,
            m0,
            m1: None,
            m2: None,
        }
    }

    /// Constant metric; all derivative levels are exact zeros.
    pub fn constant(m: DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let flat: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        let f0 = flat.clone();
        let f1 = flat.clone();
        let f2 = flat;
        Self {
            n,
            m0: Arc::new(move |_x: &[f64]| f0.clone()),
            m1: Some(Arc::new(move |_x: &[D1]| {
                f1.iter().map(|&v| D1::lift(v)).collect()
            })),
            m2: Some(Arc::new(move |_x: &[D2]| {
                f2.iter().map(|&v| D2::lift(v)).collect()
            })),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn has_exact_derivatives(&self) -> bool {
        self.m1.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        debug_assert_eq!(x.len(), self.n);
        let flat = (self.m0)(x);
        debug_assert_eq!(flat.len(), self.n * self.n);
        DMatrix::from_row_slice(self.n, self.n, &flat)
    }

    /// Raw first-order dual evaluation of the matrix entries, when the
    /// field carries that level.
    pub fn eval_d1(&self, x: &[D1]) -> Option<GMat<D1>> {
        self.m1
            .as_ref()
            .map(|m| GMat::from_vec(self.n, self.n, m(x)))
    }

    /// Raw second-order dual evaluation of the matrix entries, when the
    /// field carries that level.
    pub fn eval_d2(&self, x: &[D2]) -> Option<GMat<D2>> {
        self.m2
            .as_ref()
            .map(|m| GMat::from_vec(self.n, self.n, m(x)))
    }

    /// Derivative of the metric along coordinate `c`.
    pub fn deval(&self, x: &[f64], c: usize) -> DMatrix<f64> {
        if let Some(m1) = &self.m1 {
            let flat = m1(&seed_d1(x, c));
            DMatrix::from_fn(self.n, self.n, |i, j| flat[i * self.n + j].du)
        } else {
            let flat = fd::matrix_deriv(&|y| (self.m0)(y), x, c);
            DMatrix::from_row_slice(self.n, self.n, &flat)
        }
    }

    /// Symmetry and positive definiteness at a point.
    pub fn validate_at(&self, x: &[f64]) -> Result<()> {
        let m = self.eval(x);
        let asym = (&m - m.transpose()).amax();
        let tol = METRIC_SYM_TOL * m.amax().max(1.0);
        if asym > tol {
            return Err(Error::AsymmetricMetric { asym, tol });
        }
        linalg::spd_cholesky(&m).map(|_| ())
    }

    /// Cholesky factor at a point (errors when not positive definite).
    pub fn cholesky_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        linalg::spd_cholesky(&self.eval(x))
    }

    /// Inverse at a point via Cholesky.
    pub fn inverse_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let l = self.cholesky_at(x)?;
        let n = self.n;
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = nalgebra::DVector::zeros(n);
            e[j] = 1.0;
            let z = linalg::solve_lower(&l, &e);
            let col = linalg::solve_lower_t(&l, &z);
            inv.set_column(j, &col);
        }
        Ok((&inv + inv.transpose()) * 0.5)
    }
}

/// Build a [`SmoothMap`] from one generic function item evaluated at all
/// three scalar levels: `smooth_map!(n_in, n_out, func)` where
/// `fn func<S: Real>(x: &[S]) -> Vec<S>`.
#[macro_export]
macro_rules! smooth_map {
    ($n_in:expr, $n_out:expr, $f:expr) => {{
        $crate::geometry::SmoothMap::from_levels(
            $n_in,
            $n_out,
            ::std::sync::Arc::new(move |x: &[f64]| $f(x)),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D1]| $f(x))),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D2]| $f(x))),
        )
    }};
}

/// Like [`smooth_map!`] but for parameterized families:
/// `fn func<S: Real>(p: &Params, x: &[S]) -> Vec<S>` with cloneable params.
#[macro_export]
macro_rules! smooth_map_with {
    ($n_in:expr, $n_out:expr, $params:expr, $f:expr) => {{
        let p0 = ::std::clone::Clone::clone(&$params);
        let p1 = ::std::clone::Clone::clone(&$params);
        let p2 = ::std::clone::Clone::clone(&$params);
        $crate::geometry::SmoothMap::from_levels(
            $n_in,
            $n_out,
            ::std::sync::Arc::new(move |x: &[f64]| $f(&p0, x)),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D1]| {
                $f(&p1, x)
            })),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D2]| {
                $f(&p2, x)
            })),
        )
    }};
}

/// Build a [`MetricField`] from one generic function item returning the
/// row-major flattened matrix.
#[macro_export]
macro_rules! metric_field {
    ($n:expr, $f:expr) => {{
        $crate::geometry::MetricField::from_levels(
            $n,
            ::std::sync::Arc::new(move |x: &[f64]| $f(x)),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D1]| $f(x))),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D2]| $f(x))),
        )
    }};
}

/// Parameterized version of [`metric_field!`].
#[macro_export]
macro_rules! metric_field_with {
    ($n:expr, $params:expr, $f:expr) => {{
        let p0 = ::std::clone::Clone::clone(&$params);
        let p1 = ::std::clone::Clone::clone(&$params);
        let p2 = ::std::clone::Clone::clone(&$params);
        $crate::geometry::MetricField::from_levels(
            $n,
            ::std::sync::Arc::new(move |x: &[f64]| $f(&p0, x)),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D1]| {
                $f(&p1, x)
            })),
            Some(::std::sync::Arc::new(move |x: &[$crate::num::D2]| {
                $f(&p2, x)
            })),
        )
    }};
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::real::Real;

    fn quad_map<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0] * x[0] + x[1], x[0] * x[1] * x[1]]
    }

    #[test]
    fn jacobian_exact_vs_fd() {
        let exact = smooth_map!(2, 2, quad_map);
        let fd_only = SmoothMap::from_f64(
            2,
            2,
            Arc::new(|x: &[f64]| quad_map(x)),
        );
        let x = [0.4, -1.1];
        let je = exact.jacobian(&x);
        let jf = fd_only.jacobian(&x);
        assert!((je.clone() - jf).amax() < 1e-6 * (1.0 + je.amax()));
        let expect =
            DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 1.0, x[1] * x[1], 2.0 * x[0] * x[1]]);
        assert!((je - expect).amax() < 1e-13);
    }

    #[test]
    fn hessian_component_exact() {
        let m = smooth_map!(2, 2, quad_map);
        let x = [0.4, -1.1];
        let h1 = m.hessian_component(1, &x);
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 2.0 * x[1], 2.0 * x[1], 2.0 * x[0]]);
        assert!((h1 - expect).amax() < 1e-12);
    }

    fn scaled_metric<S: Real>(x: &[S]) -> Vec<S> {
        // diag(1, 1 + x0^2) as a flattened matrix.
        vec![
            S::one(),
            S::zero(),
            S::zero(),
            S::one() + x[0] * x[0],
        ]
    }

    #[test]
    fn metric_derivative_exact_vs_fd() {
        let exact = metric_field!(2, scaled_metric);
        let fd_only = MetricField::from_f64(2, Arc::new(|x: &[f64]| scaled_metric(x)));
        let x = [0.7, 0.3];
        let de = exact.deval(&x, 0);
        let df = fd_only.deval(&x, 0);
        assert!((de.clone() - df).amax() < 1e-6);
        assert!((de[(1, 1)] - 2.0 * x[0]).abs() < 1e-14);
        assert!(exact.validate_at(&x).is_ok());
    }

    #[test]
    fn constant_metric_has_zero_derivative() {
        let m = MetricField::constant(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]));
        let d = m.deval(&[0.3, 0.4], 1);
        assert_eq!(d.amax(), 0.0);
    }
}
