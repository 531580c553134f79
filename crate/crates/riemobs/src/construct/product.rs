//! Product-metric recipe: pull back a product of an output metric `Q` and
//! a complement metric `R` through the stacked map `x -> (h(x), h_perp(x))`.
//! Metrics built this way make the output map a Riemannian submersion and
//! annihilate the obstruction tensor wherever the rank conditions hold.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{MetricField, SmoothMap};
use crate::num::linalg;
use crate::num::real::D1;

/// Complement of the output map: a smooth `h_perp` from state space to a
/// `d`-dimensional arrival space carrying its own metric `R`. The declared
/// rank is `n - p`; arrival dimension may exceed it (embedded targets are
/// handled by over-parametrizing the arrival space).
#[derive(Clone)]
pub struct OrthComplementMap {
    pub h_perp: SmoothMap,
    pub rank: usize,
    pub r: MetricField,
}

impl OrthComplementMap {
    pub fn new(h_perp: SmoothMap, rank: usize, r: MetricField) -> Self {
        assert_eq!(
            r.dim(),
            h_perp.n_out(),
            "complement metric must live on the arrival space"
        );
        assert!(rank <= h_perp.n_out());
        Self { h_perp, rank, r }
    }
}

/// A metric assembled by the product recipe, keeping its ingredients for
/// later block analysis and reporting.
#[derive(Clone)]
pub struct ConstructedMetric {
    pub metric: MetricField,
    pub q: MetricField,
    pub ortho: OrthComplementMap,
    pub h: SmoothMap,
}

/// Assemble `P(x) = dh^T Q(h(x)) dh + dh_perp^T R(h_perp(x)) dh_perp` after
/// verifying the rank conditions at the probe points:
/// `rank(dh_perp)` equals the declared complement rank (usually `n - p`,
/// smaller when the complement maps into a higher-dimensional arrival
/// space) and the stacked jacobian `(dh; dh_perp)` has full rank `n`.
pub fn build_product_metric(
    q: &MetricField,
    ortho: &OrthComplementMap,
    h: &SmoothMap,
    probes: &[Vec<f64>],
) -> Result<ConstructedMetric> {
    let n = h.n_in();
    assert_eq!(ortho.h_perp.n_in(), n);
    assert_eq!(q.dim(), h.n_out());
    for x in probes {
        let dperp = ortho.h_perp.jacobian(x);
        let r_perp = linalg::rank(&dperp);
        if r_perp != ortho.rank {
            return Err(Error::RankViolation {
                rank: r_perp,
                expected: ortho.rank,
                point: x.clone(),
            });
        }
        let dh = h.jacobian(x);
        let mut stacked =
            nalgebra::DMatrix::zeros(dh.nrows() + dperp.nrows(), n);
        stacked.view_mut((0, 0), (dh.nrows(), n)).copy_from(&dh);
        stacked
            .view_mut((dh.nrows(), 0), (dperp.nrows(), n))
            .copy_from(&dperp);
        let r_stack = linalg::rank(&stacked);
        if r_stack != n {
            return Err(Error::RankViolation {
                rank: r_stack,
                expected: n,
                point: x.clone(),
            });
        }
    }
    let q0 = q.clone();
    let h0 = h.clone();
    let perp0 = ortho.h_perp.clone();
    let r0 = ortho.r.clone();
    let m0 = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let dh = h0.jacobian(x);
        let y = h0.eval(x);
        let qm = q0.eval(&y);
        let dperp = perp0.jacobian(x);
        let xi = perp0.eval(x);
        let rm = r0.eval(&xi);
        let out = dh.transpose() * qm * dh + dperp.transpose() * rm * dperp;
        let out = (&out + out.transpose()) * 0.5;
        (0..n * n).map(|k| out[(k / n, k % n)]).collect()
    });
    let exact = q.has_exact_derivatives()
        && ortho.r.has_exact_derivatives()
        && h.has_exact_derivatives()
        && ortho.h_perp.has_exact_derivatives();
    let metric = if exact {
        let q1 = q.clone();
        let h1 = h.clone();
        let perp1 = ortho.h_perp.clone();
        let r1 = ortho.r.clone();
        let m1 = Arc::new(move |x: &[D1]| -> Vec<D1> {
            let dh = h1.jacobian_d1(x).expect("output jacobian dual level");
            let y = h1.eval_d1(x).expect("output dual level");
            let qm = q1.eval_d1(&y).expect("output metric dual level");
            let dperp = perp1
                .jacobian_d1(x)
                .expect("complement jacobian dual level");
            let xi = perp1.eval_d1(x).expect("complement dual level");
            let rm = r1.eval_d1(&xi).expect("complement metric dual level");
            let out = dh
                .t()
                .mul(&qm)
                .mul(&dh)
                .add(&dperp.t().mul(&rm).mul(&dperp));
            let sym = out.add(&out.t()).scale(D1::new(0.5, 0.0));
            sym.data().to_vec()
        });
        MetricField::from_levels(n, m0, Some(m1), None)
    } else {
        MetricField::from_f64(n, m0)
    };
    Ok(ConstructedMetric {
        metric,
        q: q.clone(),
        ortho: ortho.clone(),
        h: h.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::real::Real;
    use crate::smooth_map;
    use nalgebra::DMatrix;

    fn h_first<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0]]
    }

    fn h_second<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[1]]
    }

    #[test]
    fn coordinate_split_gives_identity() {
        let q = MetricField::constant(DMatrix::identity(1, 1));
        let r = MetricField::constant(DMatrix::identity(1, 1));
        let ortho = OrthComplementMap::new(smooth_map!(2, 1, h_second), 1, r);
        let h = smooth_map!(2, 1, h_first);
        let probes = vec![vec![0.3, -0.7]];
        let built = build_product_metric(&q, &ortho, &h, &probes).unwrap();
        let got = built.metric.eval(&[0.3, -0.7]);
        assert!((got - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    fn squash<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0] + x[1]]
    }

    #[test]
    fn dependent_complement_is_rejected() {
        // h_perp = h has the right rank but the stacked jacobian loses
        // rank, so assembly must refuse.
        let q = MetricField::constant(DMatrix::identity(1, 1));
        let r = MetricField::constant(DMatrix::identity(1, 1));
        let ortho = OrthComplementMap::new(smooth_map!(2, 1, squash), 1, r);
        let h = smooth_map!(2, 1, squash);
        let probes = vec![vec![0.1, 0.2]];
        let err = build_product_metric(&q, &ortho, &h, &probes);
        assert!(matches!(err, Err(Error::RankViolation { expected: 2, .. })));
    }

    fn curved_perp<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[1] - x[0] * x[0]]
    }

    fn r_of_xi<S: Real>(xi: &[S]) -> Vec<S> {
        vec![S::one() + xi[0] * xi[0]]
    }

    #[test]
    fn assembled_metric_matches_hand_formula_and_is_exact() {
        let q = MetricField::constant(DMatrix::from_row_slice(1, 1, &[3.0]));
        let r = crate::metric_field!(1, r_of_xi);
        let ortho = OrthComplementMap::new(smooth_map!(2, 1, curved_perp), 1, r);
        let h = smooth_map!(2, 1, h_first);
        let probes = vec![vec![0.4, 0.9]];
        let built = build_product_metric(&q, &ortho, &h, &probes).unwrap();
        assert!(built.metric.has_exact_derivatives());
        let x = [0.4, 0.9];
        let xi = x[1] - x[0] * x[0];
        let w = 1.0 + xi * xi;
        // dh = (1, 0); dperp = (-2 x0, 1).
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[
                3.0 + w * 4.0 * x[0] * x[0],
                -w * 2.0 * x[0],
                -w * 2.0 * x[0],
                w,
            ],
        );
        assert!((built.metric.eval(&x) - expect).amax() < 1e-13);
        // Exact derivative path against finite differences.
        let fd = MetricField::from_f64(2, {
            let mc = built.metric.clone();
            Arc::new(move |x: &[f64]| {
                let m = mc.eval(x);
                (0..4).map(|k| m[(k / 2, k % 2)]).collect()
            })
        });
        for c in 0..2 {
            let de = built.metric.deval(&x, c);
            let df = fd.deval(&x, c);
            assert!((de - df).amax() < 1e-6);
        }
    }
}
