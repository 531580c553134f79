//! Coordinate-change utilities: Newton inversion of a chart, pushforward
//! of metrics and of vector fields under a diffeomorphism.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::fields::{MetricField, SmoothMap};
use crate::num::gmat::GMat;
use crate::tol::CHART_INVERSION_TOL;

const INVERT_MAX_ITERS: usize = 50;

/// Solve `phi(x) = u` by damped Newton starting from `x_guess`.
pub fn invert_map(phi: &SmoothMap, u: &[f64], x_guess: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(phi.n_in(), phi.n_out(), "only square charts invert");
    assert_eq!(u.len(), phi.n_out());
    let tol = CHART_INVERSION_TOL * (1.0 + u.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let mut x = x_guess.to_vec();
    let res = |x: &[f64]| -> Vec<f64> {
        phi.eval(x).iter().zip(u).map(|(a, b)| a - b).collect()
    };
    let nrm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = res(&x);
    for it in 0..INVERT_MAX_ITERS {
        let rn = nrm(&r);
        if rn <= tol {
            return Ok(x);
        }
        let j = phi.jacobian(&x);
        let delta = j
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or(Error::SingularJacobian)?;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..8 {
            let cand: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, xi)| xi - lambda * delta[i])
                .collect();
            let rc = res(&cand);
            if nrm(&rc) < rn {
                x = cand;
                r = rc;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            return Err(Error::NoConvergence {
                residual: rn,
                iters: it,
            });
        }
    }
    Err(Error::NoConvergence {
        residual: nrm(&r),
        iters: INVERT_MAX_ITERS,
    })
}

/// Metric in the coordinates of `phi`: at `u`, with `x = phi_inv(u)` and
/// `J = dphi/dx(x)`, the matrix is `J^{-T} P(x) J^{-1}`. Lengths of curves
/// are invariant under this transport. The first derivative level is exact
/// whenever the inverse chart, the chart jacobian and the metric all carry
/// dual evaluations; otherwise finite differences take over.
pub fn pushforward_metric(
    p: &MetricField,
    phi: &SmoothMap,
    phi_inv: &SmoothMap,
) -> MetricField {
    let n = p.dim();
    assert_eq!(phi.n_in(), n);
    assert_eq!(phi.n_out(), n);
    assert_eq!(phi_inv.n_in(), n);
    assert_eq!(phi_inv.n_out(), n);
    let p0 = p.clone();
    let phi0 = phi.clone();
    let inv0 = phi_inv.clone();
    let m0 = Arc::new(move |u: &[f64]| -> Vec<f64> {
        let x = inv0.eval(u);
        let j = phi0.jacobian(&x);
        let jinv = j
            .clone()
            .try_inverse()
            .expect("chart jacobian invertible");
        let pm = p0.eval(&x);
        let out = jinv.transpose() * pm * jinv;
        (0..n * n).map(|k| out[(k / n, k % n)]).collect()
    });
    let exact = p.has_exact_derivatives()
        && phi.has_exact_derivatives()
        && phi_inv.has_exact_derivatives();
    if !exact {
        return MetricField::from_f64(n, m0);
    }
    let p1 = p.clone();
    let phi1 = phi.clone();
    let inv1 = phi_inv.clone();
    let m1 = Arc::new(move |u: &[crate::num::D1]| -> Vec<crate::num::D1> {
        let x = inv1.eval_d1(u).expect("inverse chart dual level");
        let j = phi1.jacobian_d1(&x).expect("chart jacobian dual level");
        let jinv = j.inv().expect("chart jacobian invertible");
        let pm = p1.eval_d1(&x).expect("metric dual level");
        let out = jinv.t().mul(&pm).mul(&jinv);
        out.data().to_vec()
    });
    MetricField::from_levels(n, m0, Some(m1), None)
}

/// Vector field in the coordinates of `phi`: at `u`, with `x = phi_inv(u)`,
/// the value is `dphi/dx(x) * f(x)`.
pub fn pushforward_vector_field(
    f: &SmoothMap,
    phi: &SmoothMap,
    phi_inv: &SmoothMap,
) -> SmoothMap {
    let n = f.n_in();
    assert_eq!(f.n_out(), n);
    assert_eq!(phi.n_in(), n);
    let f0 = f.clone();
    let phi0 = phi.clone();
    let inv0 = phi_inv.clone();
    let e0 = Arc::new(move |u: &[f64]| -> Vec<f64> {
        let x = inv0.eval(u);
        let j = phi0.jacobian(&x);
        let fx = DVector::from_column_slice(&f0.eval(&x));
        let out = j * fx;
        out.iter().cloned().collect()
    });
    let exact = f.has_exact_derivatives()
        && phi.has_exact_derivatives()
        && phi_inv.has_exact_derivatives();
    if !exact {
        return SmoothMap::from_f64(n, n, e0);
    }
    let f1 = f.clone();
    let phi1 = phi.clone();
    let inv1 = phi_inv.clone();
    let e1 = Arc::new(move |u: &[crate::num::D1]| -> Vec<crate::num::D1> {
        let x = inv1.eval_d1(u).expect("inverse chart dual level");
        let j = phi1.jacobian_d1(&x).expect("chart jacobian dual level");
        let fx = f1.eval_d1(&x).expect("field dual level");
        let fv = GMat::from_vec(x.len(), 1, fx);
        j.mul(&fv).data().to_vec()
    });
    SmoothMap::from_levels(n, n, e0, Some(e1), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::real::Real;
    use crate::smooth_map;
    use nalgebra::DMatrix;

    fn chart<S: Real>(x: &[S]) -> Vec<S> {
        // Triangular polynomial chart with unit-determinant jacobian.
        let (y, za, zb) = (x[0], x[1], x[2]);
        vec![
            y,
            za - y,
            zb + y * y * S::lift(0.5) + y * za * S::lift(0.1),
        ]
    }

    fn chart_inv<S: Real>(u: &[S]) -> Vec<S> {
        let (y, xa, xb) = (u[0], u[1], u[2]);
        let za = xa + y;
        vec![
            y,
            za,
            xb - y * y * S::lift(0.5) - y * za * S::lift(0.1),
        ]
    }

    #[test]
    fn newton_inversion_matches_closed_form() {
        let phi = smooth_map!(3, 3, chart);
        let u = [0.8, -0.3, 1.7];
        let x = invert_map(&phi, &u, &[0.0, 0.0, 0.0]).unwrap();
        let expect = chart_inv(&u);
        for i in 0..3 {
            assert!((x[i] - expect[i]).abs() < 1e-10);
        }
        let back = phi.eval(&x);
        for i in 0..3 {
            assert!((back[i] - u[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn pushforward_constant_metric_under_linear_map() {
        fn lin<S: Real>(x: &[S]) -> Vec<S> {
            vec![x[0] * S::lift(2.0), x[0] * S::lift(-1.0) + x[1]]
        }
        fn lin_inv<S: Real>(u: &[S]) -> Vec<S> {
            vec![u[0] * S::lift(0.5), u[0] * S::lift(0.5) + u[1]]
        }
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let phi = smooth_map!(2, 2, lin);
        let phi_inv = smooth_map!(2, 2, lin_inv);
        let pushed = pushforward_metric(&p, &phi, &phi_inv);
        let got = pushed.eval(&[0.3, 0.9]);
        // J = [[2,0],[-1,1]], Jinv = [[0.5,0],[0.5,1]], Jinv^T Jinv below.
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 1.0]);
        assert!((got - expect).amax() < 1e-12);
    }

    #[test]
    fn curve_length_is_chart_invariant() {
        fn metric<S: Real>(x: &[S]) -> Vec<S> {
            let w = S::one() + x[1] * x[1];
            let mut out = vec![S::zero(); 9];
            out[0] = S::lift(3.0);
            out[4] = S::one();
            out[8] = w;
            out
        }
        let p = crate::metric_field!(3, metric);
        let phi = smooth_map!(3, 3, chart);
        let phi_inv = smooth_map!(3, 3, chart_inv);
        let pushed = pushforward_metric(&p, &phi, &phi_inv);
        // Length of a sampled curve under P equals the length of its image
        // under the pushforward.
        let curve = |t: f64| -> Vec<f64> { vec![t, t * t - 0.4, (2.0 * t).sin()] };
        let n = 2000;
        let seg = |pts: &dyn Fn(f64) -> Vec<f64>, m: &MetricField| -> f64 {
            let mut total = 0.0;
            for k in 0..n {
                let t0 = -0.5 + k as f64 / n as f64;
                let t1 = t0 + 1.0 / n as f64;
                let a = pts(t0);
                let b = pts(t1);
                let mid: Vec<f64> =
                    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                let d = DVector::from_iterator(3, a.iter().zip(&b).map(|(x, y)| y - x));
                let pm = m.eval(&mid);
                total += (d.transpose() * pm * &d)[(0, 0)].max(0.0).sqrt();
            }
            total
        };
        let len_x = seg(&curve, &p);
        let phic = phi.clone();
        let image = move |t: f64| -> Vec<f64> { phic.eval(&curve(t)) };
        let len_u = seg(&image, &pushed);
        assert!(
            (len_x - len_u).abs() < 1e-5 * (1.0 + len_x),
            "{len_x} vs {len_u}"
        );
    }

    #[test]
    fn pushforward_metric_derivative_exact_matches_fd() {
        fn metric<S: Real>(x: &[S]) -> Vec<S> {
            let w = S::one() + x[0] * x[0];
            let mut out = vec![S::zero(); 9];
            out[0] = S::one();
            out[4] = w;
            out[8] = S::lift(2.0);
            out
        }
        let p = crate::metric_field!(3, metric);
        let phi = smooth_map!(3, 3, chart);
        let phi_inv = smooth_map!(3, 3, chart_inv);
        let pushed = pushforward_metric(&p, &phi, &phi_inv);
        assert!(pushed.has_exact_derivatives());
        let m0 = {
            let pc = pushed.clone();
            move |u: &[f64]| {
                let m = pc.eval(u);
                (0..9).map(|k| m[(k / 3, k % 3)]).collect::<Vec<f64>>()
            }
        };
        let fd_version = MetricField::from_f64(3, Arc::new(m0));
        let u = [0.4, 0.2, -0.7];
        for c in 0..3 {
            let de = pushed.deval(&u, c);
            let df = fd_version.deval(&u, c);
            assert!((de - df).amax() < 1e-6, "component {c}");
        }
    }

    #[test]
    fn pushforward_vector_field_linearizes_correctly() {
        fn field<S: Real>(x: &[S]) -> Vec<S> {
            vec![x[1], -x[0], x[2] * x[0]]
        }
        let f = smooth_map!(3, 3, field);
        let phi = smooth_map!(3, 3, chart);
        let phi_inv = smooth_map!(3, 3, chart_inv);
        let fu = pushforward_vector_field(&f, &phi, &phi_inv);
        // Flow invariance check at one point: J(x) f(x) = fu(phi(x)).
        let x = [0.6, -0.2, 0.9];
        let u = phi.eval(&x);
        let j = phi.jacobian(&x);
        let fx = DVector::from_column_slice(&f.eval(&x));
        let expect = j * fx;
        let got = fu.eval(&u);
        for i in 0..3 {
            assert!((got[i] - expect[i]).abs() < 1e-10);
        }
    }
}
