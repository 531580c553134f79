//! Circle benchmark: the squared radius observed on an annulus, with a
//! complement map landing on the unit circle. The complement is the
//! normalization `k/|k|` of a user-supplied non-vanishing field `k`; its
//! transversality to the output fibers is a scalar residual that the
//! builder checks at probe points.

use crate::bench::{BenchmarkSpec, Expectation, NamedMetric, SimDefaults};
use crate::conditions::{Region, Verdict};
use crate::construct::{build_product_metric, OrthComplementMap};
use crate::error::Result;
use crate::geometry::{MetricField, SmoothMap};
use crate::model::SystemModel;
use crate::num::real::Real;
use crate::observer::{DistanceMethod, GapFunction};

/// Annulus radii: the region excludes a disc around the origin where the
/// output map loses rank, and stays inside the sampling box.
const INNER_RADIUS: f64 = 0.2;
const OUTER_RADIUS: f64 = 5.0;

fn squared_radius<S: Real>(x: &[S]) -> Vec<S> {
    vec![x[0] * x[0] + x[1] * x[1]]
}

fn rotation_drift<S: Real>(x: &[S]) -> Vec<S> {
    vec![-x[1], x[0]]
}

/// Normalize a 2d field: `x -> k(x) / |k(x)|`. The image lies on the unit
/// circle, so the jacobian has rank one wherever `k` does not vanish and
/// is not locally parallel to itself.
pub fn normalized_field(k: &SmoothMap) -> SmoothMap {
    assert_eq!(k.n_in(), 2);
    assert_eq!(k.n_out(), 2);
    let k0 = k.clone();
    let f0 = std::sync::Arc::new(move |x: &[f64]| -> Vec<f64> {
        let v = k0.eval(x);
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        vec![v[0] / n, v[1] / n]
    });
    if !k.has_exact_derivatives() {
        return SmoothMap::from_f64(2, 2, f0);
    }
    let k1 = k.clone();
    let f1 = std::sync::Arc::new(
        move |x: &[crate::num::real::D1]| -> Vec<crate::num::real::D1> {
            let v = k1.eval_d1(x).unwrap();
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            vec![v[0] / n, v[1] / n]
        },
    );
    let k2 = k.clone();
    let f2 = std::sync::Arc::new(
        move |x: &[crate::num::real::D2]| -> Vec<crate::num::real::D2> {
            let v = k2.eval_d2(x).unwrap();
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            vec![v[0] / n, v[1] / n]
        },
    );
    SmoothMap::from_levels(2, 2, f0, Some(f1), Some(f2))
}

/// Scalar transversality residual of `k` against the radial fibers:
/// nonzero exactly where the normalized field is transverse to the level
/// sets of the squared radius.
pub fn transversality_residual(k: &SmoothMap, x: &[f64]) -> f64 {
    let v = k.eval(x);
    let j = k.jacobian(x);
    let bracket_2 = v[1] * j[(0, 1)] - v[0] * j[(1, 1)];
    let bracket_1 = v[1] * j[(0, 0)] - v[0] * j[(1, 0)];
    x[0] * bracket_2 - x[1] * bracket_1
}

/// Annulus region between the two radii inside a box.
pub fn circle_region() -> Region {
    Region::with_membership(
        vec![-OUTER_RADIUS, -OUTER_RADIUS],
        vec![OUTER_RADIUS, OUTER_RADIUS],
        std::sync::Arc::new(|x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            r2 >= INNER_RADIUS * INNER_RADIUS
                && r2 <= OUTER_RADIUS * OUTER_RADIUS
        }),
    )
}

/// Assemble the circle benchmark from a complement field `k`, an output
/// weight `q0 > 0` and a weight `r` on the complement's arrival space.
///
/// The rotation drift preserves the resulting metric, so the decay
/// condition fails at any positive rate floor while the tangency and
/// weight-recovery conditions hold; the expectation list records this.
pub fn circle_output(
    k: &SmoothMap,
    q0: f64,
    r: MetricField,
) -> Result<BenchmarkSpec> {
    let region = circle_region();
    let h = crate::smooth_map!(2, 1, squared_radius);
    let model = SystemModel::new(crate::smooth_map!(2, 2, rotation_drift), h.clone());
    let ortho = OrthComplementMap::new(normalized_field(k), 1, r);
    let q = MetricField::constant(nalgebra::dmatrix![q0]);
    let probes: Vec<Vec<f64>> = region
        .sample(3, 16)?
        .into_iter()
        .map(|p| p.0)
        .collect();
    let product = build_product_metric(&q, &ortho, &h, &probes)?;
    Ok(BenchmarkSpec {
        name: "circle".into(),
        description: "squared radius observed on an annulus; the rotation \
                      drift is an isometry of the product metric, so decay \
                      fails while tangency and weight recovery hold"
            .into(),
        model,
        region,
        metrics: vec![NamedMetric {
            name: "product".into(),
            metric: product.metric,
            output_weight: MetricField::constant(nalgebra::dmatrix![q0]),
            gap: GapFunction::from_constant(nalgebra::dmatrix![q0])?,
        }],
        expected: vec![
            Expectation::new("product", "a3-nullity", Verdict::Pass),
            Expectation::new("product", "submersion", Verdict::Pass),
            Expectation::new("product", "a2", Verdict::Fail),
        ],
        q_min: 1e-6,
        sim: Some(SimDefaults {
            x0: vec![1.2, 0.0],
            xh0: vec![0.9, 0.5],
            dt: 0.01,
            horizon: 5.0,
            gain: 4.0,
            rate_target: 0.0,
            distance: DistanceMethod::Geodesic,
            stride: 10,
        }),
    })
}

fn identity_field<S: Real>(x: &[S]) -> Vec<S> {
    vec![x[0], x[1]]
}

/// Default instance: radial complement field `k(x) = x`.
pub fn default_circle() -> BenchmarkSpec {
    circle_output(
        &crate::smooth_map!(2, 2, identity_field),
        1.0,
        MetricField::constant(nalgebra::DMatrix::identity(2, 2)),
    )
    .expect("radial field is transverse on the annulus")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{check_a2, check_submersion};
    use crate::error::Error;

    const TOL: f64 = 1e-9;

    #[test]
    fn radial_field_residual_is_minus_squared_radius() {
        let k = crate::smooth_map!(2, 2, identity_field);
        for x in [[0.6, -0.3], [2.0, 1.5], [-1.1, 0.2]] {
            let res = transversality_residual(&k, &x);
            let r2 = x[0] * x[0] + x[1] * x[1];
            assert!((res + r2).abs() < TOL, "residual {res} at {x:?}");
        }
    }

    #[test]
    fn normalized_field_lands_on_the_unit_circle_with_rank_one() {
        let hp = normalized_field(&crate::smooth_map!(2, 2, identity_field));
        for x in [[0.5, -0.4], [3.0, 1.0]] {
            let v = hp.eval(&x);
            assert!((v[0] * v[0] + v[1] * v[1] - 1.0).abs() < TOL);
            let j = hp.jacobian(&x);
            // Rows are orthogonal to the radial direction.
            for row in 0..2 {
                let dot = j[(row, 0)] * x[0] + j[(row, 1)] * x[1];
                assert!(dot.abs() < TOL);
            }
        }
    }

    #[test]
    fn weight_recovery_holds_exactly_on_the_default_instance() {
        let bench = default_circle();
        let report = check_submersion(
            &bench.metrics[0].metric,
            &bench.metrics[0].output_weight,
            bench.model.output(),
            &bench.region,
            64,
            0,
            1e-6,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.margin.unwrap() > 0.0);
    }

    #[test]
    fn rotation_is_an_isometry_so_decay_fails() {
        let bench = default_circle();
        let report = check_a2(
            &bench.model,
            &bench.metrics[0].metric,
            &bench.region,
            64,
            0,
            bench.q_min,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        // The estimated rate is numerically zero.
        assert!(report.margin.unwrap().abs() < 1e-8);
    }

    fn parallel_field<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0], x[0]]
    }

    #[test]
    fn degenerate_complement_field_is_rejected() {
        let err = circle_output(
            &crate::smooth_map!(2, 2, parallel_field),
            1.0,
            MetricField::constant(nalgebra::DMatrix::identity(2, 2)),
        )
        .err()
        .expect("degenerate field should be rejected");
        match err {
            Error::RankViolation { rank, expected, .. } => {
                assert!(rank < expected);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
