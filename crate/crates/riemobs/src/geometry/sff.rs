//! Second fundamental form of the output fibration and its chart-change
//! transport.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::fields::{MetricField, SmoothMap};
use crate::geometry::tensors::christoffel;
use crate::num::linalg;

/// Second-fundamental-form tensor of the output map `h` with respect to the
/// state metric `P` and output metric `Q`, one `n x n` matrix per output
/// component:
///
/// `II^i_ab = d2h_i/dx_a dx_b - sum_c Gamma^c_ab dh_i/dx_c
///           + sum_jk Delta^i_jk(h(x)) dh_j/dx_a dh_k/dx_b`
///
/// where `Gamma` are the symbols of `P` and `Delta` those of `Q`.
/// Errors when `dh` is rank deficient at the point.
pub fn second_fundamental_form(
    p: &MetricField,
    q: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<Vec<DMatrix<f64>>> {
    let n = p.dim();
    let pdim = h.n_out();
    let jh = h.jacobian(x);
    if linalg::rank(&jh) < pdim {
        return Err(Error::RankDeficientOutput {
            rank: linalg::rank(&jh),
            expected: pdim,
        });
    }
    let gamma = christoffel(p, x)?;
    let y = h.eval(x);
    let delta = christoffel(q, &y)?;
    let mut out = Vec::with_capacity(pdim);
    for i in 0..pdim {
        let mut m = h.hessian_component(i, x);
        for a in 0..n {
            for b in 0..n {
                let mut corr = 0.0;
                for c in 0..n {
                    corr += gamma.gamma(c, a, b) * jh[(i, c)];
                }
                let mut amb = 0.0;
                for j in 0..pdim {
                    for k in 0..pdim {
                        amb += delta.gamma(i, j, k) * jh[(j, a)] * jh[(k, b)];
                    }
                }
                m[(a, b)] += amb - corr;
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Transport the tensor under a state chart change `phi` and an output chart
/// change `psi`, both given by their jacobians at the point:
///
/// `II_new^k = Jphi^{-T} (sum_i Jpsi_ki II^i) Jphi^{-1}`.
///
/// Errors when the state jacobian is singular.
pub fn transform_sff(
    sff: &[DMatrix<f64>],
    jphi: &DMatrix<f64>,
    jpsi: &DMatrix<f64>,
) -> Result<Vec<DMatrix<f64>>> {
    let inv = jphi
        .clone()
        .try_inverse()
        .ok_or(Error::SingularJacobian)?;
    let p_out = jpsi.nrows();
    let mut out = Vec::with_capacity(p_out);
    for k in 0..p_out {
        let mut mixed = DMatrix::zeros(jphi.nrows(), jphi.ncols());
        for (i, m) in sff.iter().enumerate() {
            mixed += m * jpsi[(k, i)];
        }
        out.push(inv.transpose() * mixed * &inv);
    }
    Ok(out)
}

/// Frobenius norm of the largest component tensor; the scalar reported as
/// the nullity margin.
pub fn sff_max_norm(sff: &[DMatrix<f64>]) -> f64 {
    sff.iter().map(linalg::fro).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::real::Real;
    use crate::{metric_field, smooth_map};

    #[test]
    fn linear_output_constant_metrics_vanish() {
        // Constant P and Q with linear h: every term is identically zero.
        let p = MetricField::constant(DMatrix::from_row_slice(
            2,
            2,
            &[2.0, 0.5, 0.5, 3.0],
        ));
        let q = MetricField::constant(DMatrix::from_row_slice(1, 1, &[2.0]));
        fn lin<S: Real>(x: &[S]) -> Vec<S> {
            vec![x[0] + S::lift(2.0) * x[1]]
        }
        let h = smooth_map!(2, 1, lin);
        let sff = second_fundamental_form(&p, &q, &h, &[0.3, -0.8]).unwrap();
        assert_eq!(sff.len(), 1);
        assert_eq!(sff[0].amax(), 0.0);
    }

    #[test]
    fn quadratic_output_euclidean_metric_gives_hessian() {
        // With P = I, Q = I (flat), II reduces to the plain Hessian of h.
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let q = MetricField::constant(DMatrix::identity(1, 1));
        fn sq<S: Real>(x: &[S]) -> Vec<S> {
            vec![x[0] * x[0] + x[1] * x[1]]
        }
        let h = smooth_map!(2, 1, sq);
        let sff = second_fundamental_form(&p, &q, &h, &[1.0, 0.5]).unwrap();
        assert!((sff[0].clone() - DMatrix::identity(2, 2) * 2.0).amax() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let q = MetricField::constant(DMatrix::identity(1, 1));
        fn sq<S: Real>(x: &[S]) -> Vec<S> {
            vec![x[0] * x[0] + x[1] * x[1]]
        }
        let h = smooth_map!(2, 1, sq);
        // dh vanishes at the origin.
        assert!(matches!(
            second_fundamental_form(&p, &q, &h, &[0.0, 0.0]),
            Err(Error::RankDeficientOutput { .. })
        ));
    }

    fn curved2<S: Real>(x: &[S]) -> Vec<S> {
        let a = S::lift(0.5);
        vec![S::one(), S::zero(), S::zero(), S::one() + a * x[0] * x[0]]
    }

    #[test]
    fn transport_round_trip_identity() {
        // Transporting with identity jacobians is a no-op.
        let p = metric_field!(2, curved2);
        let q = MetricField::constant(DMatrix::identity(1, 1));
        fn out_map<S: Real>(x: &[S]) -> Vec<S> {
            vec![x[0] + x[1] * x[1]]
        }
        let h = smooth_map!(2, 1, out_map);
        let x = [0.4, 0.2];
        let sff = second_fundamental_form(&p, &q, &h, &x).unwrap();
        let moved = transform_sff(
            &sff,
            &DMatrix::identity(2, 2),
            &DMatrix::identity(1, 1),
        )
        .unwrap();
        assert!((sff[0].clone() - moved[0].clone()).amax() < 1e-14);
    }
}
