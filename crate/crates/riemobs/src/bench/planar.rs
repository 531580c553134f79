//! Planar benchmark: two-state systems `y' = f_y(y,z)`, `z' = f_z(y,z)`
//! observed through `y`, with the rank-one-plus-output metric
//! `P = e1 e1^T + u u^T`, `u = (b(y) + int_0^z da/dy(y,s) ds, a(y,z))`,
//! coming from the complement map
//! `h_perp(y,z) = int_0^y b + int_0^z a(y,s) ds`.

use std::sync::{Arc, OnceLock};

use crate::bench::{BenchmarkSpec, Expectation, NamedMetric, SimDefaults};
use crate::conditions::{Region, Verdict};
use crate::construct::{build_product_metric, OrthComplementMap};
use crate::error::{Error, Result};
use crate::geometry::{MetricField, SmoothMap};
use crate::model::SystemModel;
use crate::num::real::{Real, D1, D2};
use crate::observer::{DistanceMethod, GapFunction};

/// Region samples probed for weight positivity and rank checks.
const WEIGHT_PROBES: usize = 64;

/// Nodes and weights of 16-point Gauss-Legendre quadrature on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static CACHE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    CACHE.get_or_init(|| {
        let n = 16usize;
        let mut nodes = [0.0; 16];
        let mut weights = [0.0; 16];
        for k in 0..n {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75)
                / (n as f64 + 0.5))
                .cos();
            let mut dp = 0.0;
            for _ in 0..64 {
                // Legendre value and derivative by the three-term
                // recurrence.
                let mut p0 = 1.0;
                let mut p1 = x;
                for m in 2..=n {
                    let m = m as f64;
                    let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            nodes[k] = x;
            weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// `int_0^upper g(s) ds` by Gauss-Legendre, generic over the scalar level
/// so derivative information in `upper` flows through.
fn integral_to<S: Real>(g: &dyn Fn(S) -> S, upper: S) -> S {
    let (nodes, weights) = gauss_legendre_16();
    let half = upper * S::lift(0.5);
    let mut acc = S::zero();
    for k in 0..16 {
        let s = half * S::lift(nodes[k] + 1.0);
        acc = acc + S::lift(weights[k]) * g(s);
    }
    acc * half
}

/// Complement map `h_perp(y,z) = int_0^y b + int_0^z a(y, s) ds` with
/// derivative levels preserved when `a` and `b` provide them.
pub fn integral_complement(a: &SmoothMap, b: &SmoothMap) -> SmoothMap {
    assert_eq!(a.n_in(), 2);
    assert_eq!(a.n_out(), 1);
    assert_eq!(b.n_in(), 1);
    assert_eq!(b.n_out(), 1);
    let (a0, b0) = (a.clone(), b.clone());
    let f0 = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let ib = integral_to(&|s: f64| b0.eval(&[s])[0], x[0]);
        let ia = integral_to(&|s: f64| a0.eval(&[x[0], s])[0], x[1]);
        vec![ib + ia]
    });
    if !(a.has_exact_derivatives() && b.has_exact_derivatives()) {
        return SmoothMap::from_f64(2, 1, f0);
    }
    let (a1, b1) = (a.clone(), b.clone());
    let f1 = Arc::new(move |x: &[D1]| -> Vec<D1> {
        let ib = integral_to(&|s: D1| b1.eval_d1(&[s]).unwrap()[0], x[0]);
        let ia =
            integral_to(&|s: D1| a1.eval_d1(&[x[0], s]).unwrap()[0], x[1]);
        vec![ib + ia]
    });
    let (a2, b2) = (a.clone(), b.clone());
    let f2 = Arc::new(move |x: &[D2]| -> Vec<D2> {
        let ib = integral_to(&|s: D2| b2.eval_d2(&[s]).unwrap()[0], x[0]);
        let ia =
            integral_to(&|s: D2| a2.eval_d2(&[x[0], s]).unwrap()[0], x[1]);
        vec![ib + ia]
    });
    SmoothMap::from_levels(2, 1, f0, Some(f1), Some(f2))
}

fn first_coordinate<S: Real>(x: &[S]) -> Vec<S> {
    vec![x[0]]
}

/// Assemble the planar benchmark from a drift and the two weight
/// functions. Rejects weights that are not strictly positive on region
/// samples.
pub fn planar_family(
    drift: SmoothMap,
    a: SmoothMap,
    b: SmoothMap,
    region: Region,
) -> Result<BenchmarkSpec> {
    assert_eq!(drift.n_in(), 2);
    assert_eq!(drift.n_out(), 2);
    for pt in region.sample(0, WEIGHT_PROBES)? {
        let val = a.eval(&pt.0)[0];
        if val <= 0.0 {
            return Err(Error::NonpositiveWeight {
                value: val,
                point: pt.0,
            });
        }
    }
    let h = crate::smooth_map!(2, 1, first_coordinate);
    let model = SystemModel::new(drift, h.clone());
    let h_perp = integral_complement(&a, &b);
    let ortho = OrthComplementMap::new(
        h_perp,
        1,
        MetricField::constant(nalgebra::dmatrix![1.0]),
    );
    let q = MetricField::constant(nalgebra::dmatrix![1.0]);
    let probes: Vec<Vec<f64>> = region
        .sample(1, 16)?
        .into_iter()
        .map(|p| p.0)
        .collect();
    let product = build_product_metric(&q, &ortho, &h, &probes)?;
    Ok(BenchmarkSpec {
        name: "planar".into(),
        description: "two-state family with a rank-one-plus-output metric \
                      built from integrated weights; the reduced \
                      detectability inequality is scalar"
            .into(),
        model,
        region,
        metrics: vec![NamedMetric {
            name: "product".into(),
            metric: product.metric,
            output_weight: MetricField::constant(nalgebra::dmatrix![1.0]),
            gap: GapFunction::from_constant(nalgebra::dmatrix![1.0])?,
        }],
        expected: vec![
            Expectation::new("product", "a2", Verdict::Pass),
            Expectation::new("product", "a3-nullity", Verdict::Pass),
            Expectation::new("product", "a3-direct", Verdict::Pass),
            Expectation::new("product", "submersion", Verdict::Pass),
        ],
        q_min: 1e-6,
        sim: Some(SimDefaults {
            x0: vec![0.5, -0.3],
            xh0: vec![0.8, 0.1],
            dt: 0.01,
            horizon: 6.0,
            gain: 2.0,
            rate_target: 0.25,
            distance: DistanceMethod::Geodesic,
            stride: 10,
        }),
    })
}

fn damped_drift<S: Real>(x: &[S]) -> Vec<S> {
    vec![x[1], -x[1] - x[0]]
}

fn unit_weight<S: Real>(_x: &[S]) -> Vec<S> {
    vec![S::one()]
}

fn half_weight<S: Real>(_x: &[S]) -> Vec<S> {
    vec![S::lift(0.5)]
}

/// Default instance: damped drift `(z, -z - y)` with `a = 1`, `b = 1/2`,
/// whose scalar detectability inequality holds with rate one.
pub fn default_planar() -> BenchmarkSpec {
    planar_family(
        crate::smooth_map!(2, 2, damped_drift),
        crate::smooth_map!(2, 1, unit_weight),
        crate::smooth_map!(1, 1, half_weight),
        Region::rect(vec![-2.0, -2.0], vec![2.0, 2.0]),
    )
    .expect("default weights are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_a2;
    use crate::construct::a2_sufficiency_lhs;
    use crate::observer::observer_field;

    const TOL: f64 = 1e-9;

    fn poly_a<S: Real>(x: &[S]) -> Vec<S> {
        vec![
            S::one()
                + S::lift(0.25) * x[0] * x[0]
                + S::lift(0.1) * x[1],
        ]
    }

    fn poly_b<S: Real>(x: &[S]) -> Vec<S> {
        vec![S::lift(0.5) * x[0]]
    }

    #[test]
    fn integral_complement_matches_closed_form() {
        let hp = integral_complement(
            &crate::smooth_map!(2, 1, poly_a),
            &crate::smooth_map!(1, 1, poly_b),
        );
        let closed = |y: f64, z: f64| -> f64 {
            0.25 * y * y + z + 0.25 * y * y * z + 0.05 * z * z
        };
        for (y, z) in [(0.3, -0.7), (1.2, 0.4), (-0.8, 1.1)] {
            let got = hp.eval(&[y, z])[0];
            assert!((got - closed(y, z)).abs() < 1e-12);
            let jac = hp.jacobian(&[y, z]);
            let dy = 0.5 * y + 0.5 * y * z;
            let dz = 1.0 + 0.25 * y * y + 0.1 * z;
            assert!((jac[(0, 0)] - dy).abs() < 1e-12);
            assert!((jac[(0, 1)] - dz).abs() < 1e-12);
        }
    }

    #[test]
    fn default_instance_certifies_unit_rate() {
        let bench = default_planar();
        let report = check_a2(
            &bench.model,
            &bench.metrics[0].metric,
            &bench.region,
            128,
            0,
            bench.q_min,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(
            (report.margin.unwrap() - 1.0).abs() < 1e-6,
            "margin {:?}",
            report.margin
        );
    }

    #[test]
    fn reduced_inequality_is_tight_on_the_default_instance() {
        let bench = default_planar();
        let ortho = OrthComplementMap::new(
            integral_complement(
                &crate::smooth_map!(2, 1, unit_weight),
                &crate::smooth_map!(1, 1, half_weight),
            ),
            1,
            MetricField::constant(nalgebra::dmatrix![1.0]),
        );
        for x in [[0.4, -0.9], [1.5, 0.2], [-1.1, 1.3]] {
            let (lhs, wrw) =
                a2_sufficiency_lhs(&bench.model, &ortho, &x, &[0.0, 1.0])
                    .unwrap();
            assert!((lhs + wrw).abs() < TOL, "lhs {lhs} wrw {wrw}");
        }
    }

    fn integrator_drift<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[1], S::zero()]
    }

    fn zero_weight_b<S: Real>(_x: &[S]) -> Vec<S> {
        vec![S::zero()]
    }

    #[test]
    fn undamped_edge_case_has_zero_margin_and_fails_strictly() {
        let bench = planar_family(
            crate::smooth_map!(2, 2, integrator_drift),
            crate::smooth_map!(2, 1, unit_weight),
            crate::smooth_map!(1, 1, zero_weight_b),
            Region::rect(vec![-2.0, -2.0], vec![2.0, 2.0]),
        )
        .unwrap();
        let ortho = OrthComplementMap::new(
            integral_complement(
                &crate::smooth_map!(2, 1, unit_weight),
                &crate::smooth_map!(1, 1, zero_weight_b),
            ),
            1,
            MetricField::constant(nalgebra::dmatrix![1.0]),
        );
        let (lhs, _) =
            a2_sufficiency_lhs(&bench.model, &ortho, &[0.7, -0.4], &[0.0, 1.0])
                .unwrap();
        assert_eq!(lhs, 0.0);
        let report = check_a2(
            &bench.model,
            &bench.metrics[0].metric,
            &bench.region,
            64,
            0,
            1e-6,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
    }

    fn signed_weight<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[1]]
    }

    #[test]
    fn nonpositive_weight_is_reported_with_its_point() {
        let err = planar_family(
            crate::smooth_map!(2, 2, damped_drift),
            crate::smooth_map!(2, 1, signed_weight),
            crate::smooth_map!(1, 1, half_weight),
            Region::rect(vec![-2.0, -2.0], vec![2.0, 2.0]),
        )
        .err()
        .expect("signed weight should be rejected");
        match err {
            Error::NonpositiveWeight { value, point } => {
                assert!(value <= 0.0);
                assert_eq!(point.len(), 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn observer_matches_displayed_closed_form() {
        // With u = (b + int da/dy, a) the correction is
        // (-2k(yh - y), 2k u1/u2 (yh - y)).
        let bench = default_planar();
        let k = 1.7;
        let xh = [0.9, -0.6];
        let y = [0.2];
        let f = observer_field(
            &bench.model,
            &bench.metrics[0].metric,
            &bench.metrics[0].gap,
            k,
            &xh,
            &y,
        )
        .unwrap();
        let drift = bench.model.drift().eval(&xh);
        let innov = xh[0] - y[0];
        let (u1, u2) = (0.5, 1.0);
        assert!((f[0] - (drift[0] - 2.0 * k * innov)).abs() < TOL);
        assert!(
            (f[1] - (drift[1] + 2.0 * k * u1 / u2 * innov)).abs() < TOL
        );
    }

    #[test]
    fn grid_search_on_b_recovers_the_scalar_rate_law() {
        // For the damped drift with a = 1 and constant b the scalar
        // inequality gives rate exactly 2(1 - b); the best grid point is
        // b = 0.
        let region = Region::rect(vec![-2.0, -2.0], vec![2.0, 2.0]);
        let mut best = (f64::NEG_INFINITY, f64::NAN);
        for bval in [0.0, 0.25, 0.5, 0.75] {
            #[derive(Clone)]
            struct BParam {
                v: f64,
            }
            fn const_b<S: Real>(p: &BParam, _x: &[S]) -> Vec<S> {
                vec![S::lift(p.v)]
            }
            let b = crate::smooth_map_with!(1, 1, BParam { v: bval }, const_b);
            let bench = planar_family(
                crate::smooth_map!(2, 2, damped_drift),
                crate::smooth_map!(2, 1, unit_weight),
                b,
                region.clone(),
            )
            .unwrap();
            let report = check_a2(
                &bench.model,
                &bench.metrics[0].metric,
                &region,
                64,
                0,
                1e-6,
            )
            .unwrap();
            let q_est = report.margin.unwrap();
            assert!(
                (q_est - 2.0 * (1.0 - bval)).abs() < 1e-6,
                "b {bval}: rate {q_est}"
            );
            if q_est > best.0 {
                best = (q_est, bval);
            }
        }
        assert_eq!(best.1, 0.0);
    }
}
