//! Oscillator benchmark: frequency-modulated harmonic motion
//! `(y, z_alpha, z_beta)` with `y' = z_alpha`, `z_alpha' = -y z_beta`,
//! `z_beta' = 0`, observed through `y`.
//!
//! Two metrics are provided. The "obsmap" metric pulls a constant SPD
//! weight back through the map collecting the first four output
//! derivatives; it is differentially detectable but fails the geodesic
//! compatibility test. The "product" metric assembles output and
//! complement weights with tuned parameters and passes both.

use nalgebra::DMatrix;

use crate::bench::{BenchmarkSpec, Expectation, NamedMetric, SimDefaults};
use crate::conditions::{check_a2, Region, Verdict};
use crate::construct::{
    build_product_metric, tune_product_parameters, ConstructedMetric,
    OrthComplementMap, OscTuning,
};
use crate::error::Result;
use crate::geometry::{MetricField, SmoothMap};
use crate::model::SystemModel;
use crate::num::real::Real;
use crate::observer::{DistanceMethod, GapFunction};

/// Shell parameter of the default benchmark region.
pub const OSC_EPSILON_DEFAULT: f64 = 0.5;
/// Frozen output of `design_obsmap_weight` at the default region, rate
/// floor 1e-3, 160 samples, seed 0.
pub const OBSMAP_THETA: f64 = 8.0;

fn osc_drift<S: Real>(x: &[S]) -> Vec<S> {
    vec![x[1], -x[0] * x[2], S::zero()]
}

fn osc_out<S: Real>(x: &[S]) -> Vec<S> {
    vec![x[0]]
}

pub fn oscillator_model() -> SystemModel {
    SystemModel::new(crate::smooth_map!(3, 3, osc_drift), crate::smooth_map!(3, 1, osc_out))
}

/// Invariant shell: `eps < z_beta y^2 + z_alpha^2 < 1/eps` and
/// `eps < z_beta < 1/eps`. Both level quantities are conserved by the
/// drift, so the set is exactly invariant.
pub fn oscillator_region(eps: f64) -> Region {
    assert!(eps > 0.0 && eps < 1.0);
    let y_max = 1.0 / eps;
    let za_max = (1.0 / eps).sqrt();
    Region::with_membership(
        vec![-y_max, -za_max, eps],
        vec![y_max, za_max, 1.0 / eps],
        std::sync::Arc::new(move |x: &[f64]| {
            let level = x[2] * x[0] * x[0] + x[1] * x[1];
            level > eps && level < 1.0 / eps && x[2] > eps && x[2] < 1.0 / eps
        }),
    )
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Stationary chain weighting: the unique solution of
/// `theta S + A^T S + S A = e1 e1^T` for the shift chain `A`, in closed
/// form `S[i][j] = (-1)^{i+j} (i+j-2)! / ((i-1)!(j-1)! theta^{i+j-1})`.
pub fn chain_gramian(dim: usize, theta: f64) -> DMatrix<f64> {
    assert!(theta > 0.0);
    DMatrix::from_fn(dim, dim, |i, j| {
        let (i1, j1) = (i + 1, j + 1);
        let sign = if (i1 + j1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * factorial(i1 + j1 - 2)
            / (factorial(i1 - 1) * factorial(j1 - 1) * theta.powi((i1 + j1 - 1) as i32))
    })
}

fn obsmap_entries<S: Real>(psd: &DMatrix<f64>, x: &[S]) -> Vec<S> {
    let (y, za, zb) = (x[0], x[1], x[2]);
    let zero = S::zero();
    let one = S::one();
    // Jacobian of (y, y', y'', y''') as functions of the state: rows are
    // d/dx of y, z_alpha, -y z_beta, -z_alpha z_beta.
    let j: [[S; 3]; 4] = [
        [one, zero, zero],
        [zero, one, zero],
        [-zb, zero, -y],
        [zero, -zb, -za],
    ];
    let mut out = vec![zero; 9];
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = zero;
            for r in 0..4 {
                for s in 0..4 {
                    acc = acc + j[r][a] * S::lift(psd[(r, s)]) * j[s][b];
                }
            }
            out[a * 3 + b] = acc;
        }
    }
    out
}

/// Pullback of a constant SPD 4x4 weight through the 4-jet output map.
/// Positive definite wherever `(y, z_alpha) != 0`, which the shell region
/// guarantees.
pub fn obsmap_metric(psd: DMatrix<f64>) -> MetricField {
    assert_eq!(psd.nrows(), 4);
    crate::metric_field_with!(3, psd, obsmap_entries)
}

/// Smallest chain weighting scale `2^e`, `e = 0..=10`, whose pullback
/// metric passes differential detectability at `q_min` on the region.
pub fn design_obsmap_weight(
    model: &SystemModel,
    region: &Region,
    q_min: f64,
    samples: usize,
    seed: u64,
) -> Option<f64> {
    for e in 0..=10 {
        let theta = (2.0f64).powi(e);
        let p = obsmap_metric(chain_gramian(4, theta));
        match check_a2(model, &p, region, samples, seed, q_min) {
            Ok(report) if report.verdict == Verdict::Pass => return Some(theta),
            _ => continue,
        }
    }
    None
}

#[derive(Clone)]
struct AbParams {
    ab: f64,
}

fn complement_entries<S: Real>(p: &AbParams, x: &[S]) -> Vec<S> {
    let (y, za, zb) = (x[0], x[1], x[2]);
    let half = S::lift(0.5);
    vec![za - y, zb + half * y * y + S::lift(p.ab) * y * za]
}

/// Complement coordinates `(z_alpha - y, z_beta + y^2/2 + a b y z_alpha)`.
pub fn tuned_complement(a: f64, b: f64) -> SmoothMap {
    let params = AbParams { ab: a * b };
    crate::smooth_map_with!(3, 2, params, complement_entries)
}

fn complement_weight_entries<S: Real>(p: &AbParams, xi: &[S]) -> Vec<S> {
    // Here `p.ab` carries the single parameter `a`.
    let one = S::one();
    let zero = S::zero();
    vec![one, zero, zero, one + S::lift(p.ab) * xi[0] * xi[0]]
}

/// Complement weight `diag(1, 1 + a xi_alpha^2)`.
pub fn complement_weight(a: f64) -> MetricField {
    let params = AbParams { ab: a };
    crate::metric_field_with!(2, params, complement_weight_entries)
}

#[derive(Clone)]
struct ProductParams {
    a: f64,
    ab: f64,
    c: f64,
}

fn product_entries<S: Real>(p: &ProductParams, x: &[S]) -> Vec<S> {
    let (y, za, zb) = (x[0], x[1], x[2]);
    let _ = zb;
    let zero = S::zero();
    let one = S::one();
    let ab = S::lift(p.ab);
    // Complement jacobian rows: (-1, 1, 0) and (y + ab z_alpha, ab y, 1).
    let m: [[S; 3]; 2] = [
        [-one, one, zero],
        [y + ab * za, ab * y, one],
    ];
    let xa = za - y;
    let w = [one, one + S::lift(p.a) * xa * xa];
    let mut out = vec![zero; 9];
    out[0] = S::lift(p.c);
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = out[i * 3 + j];
            for r in 0..2 {
                acc = acc + m[r][i] * w[r] * m[r][j];
            }
            out[i * 3 + j] = acc;
        }
    }
    out
}

/// Closed-form product metric
/// `c e1 e1^T + M^T diag(1, 1 + a (z_alpha - y)^2) M` with `M` the
/// complement jacobian.
pub fn product_metric_closed_form(a: f64, b: f64, c: f64) -> MetricField {
    let params = ProductParams { a, ab: a * b, c };
    crate::metric_field_with!(3, params, product_entries)
}

/// Product metric assembled through the generic recipe, rank-probed on
/// region samples.
pub fn oscillator_product_metric(
    t: &OscTuning,
    region: &Region,
) -> Result<ConstructedMetric> {
    let model = oscillator_model();
    let ortho =
        OrthComplementMap::new(tuned_complement(t.a, t.b), 2, complement_weight(t.a));
    let q = MetricField::constant(nalgebra::dmatrix![t.c]);
    let probes: Vec<Vec<f64>> = region
        .sample(1, 16)?
        .into_iter()
        .map(|p| p.0)
        .collect();
    build_product_metric(&q, &ortho, model.output(), &probes)
}

fn chart_entries<S: Real>(p: &ProductParams, u: &[S]) -> Vec<S> {
    let zero = S::zero();
    let one = S::one();
    let mut out = vec![zero; 9];
    out[0] = S::lift(p.c);
    out[4] = one;
    out[8] = one + S::lift(p.a) * u[1] * u[1];
    out
}

/// The product metric expressed in `(y, xi_alpha, xi_beta)` coordinates:
/// `diag(c, 1, 1 + a xi_alpha^2)`.
pub fn oscillator_chart_metric(a: f64, c: f64) -> MetricField {
    let params = ProductParams { a, ab: 0.0, c };
    crate::metric_field_with!(3, params, chart_entries)
}

/// State-to-chart map `(y, z) -> (y, xi)`.
pub fn oscillator_chart_map(a: f64, b: f64) -> SmoothMap {
    #[derive(Clone)]
    struct P {
        ab: f64,
    }
    fn fwd<S: Real>(p: &P, x: &[S]) -> Vec<S> {
        let (y, za, zb) = (x[0], x[1], x[2]);
        let half = S::lift(0.5);
        vec![y, za - y, zb + half * y * y + S::lift(p.ab) * y * za]
    }
    let params = P { ab: a * b };
    crate::smooth_map_with!(3, 3, params, fwd)
}

/// Closed-form inverse of the chart map.
pub fn oscillator_chart_inverse(a: f64, b: f64) -> SmoothMap {
    #[derive(Clone)]
    struct P {
        ab: f64,
    }
    fn inv<S: Real>(p: &P, u: &[S]) -> Vec<S> {
        let (y, xa, xb) = (u[0], u[1], u[2]);
        let za = xa + y;
        let half = S::lift(0.5);
        vec![y, za, xb - half * y * y - S::lift(p.ab) * y * za]
    }
    let params = P { ab: a * b };
    crate::smooth_map_with!(3, 3, params, inv)
}

/// Direction of the gradient correction for the product metric at
/// estimate `xh`: proportional to `(1, 1, -y - a b (z_alpha + y)) / c`.
pub fn correction_direction(a: f64, b: f64, c: f64, xh: &[f64]) -> Vec<f64> {
    let ab = a * b;
    vec![1.0 / c, 1.0 / c, (-xh[0] - ab * (xh[1] + xh[0])) / c]
}

/// Full benchmark at shell parameter `eps`: tunes the product metric,
/// builds both metrics, and records the expected verdicts.
pub fn harmonic_oscillator(eps: f64) -> Result<BenchmarkSpec> {
    let model = oscillator_model();
    let region = oscillator_region(eps);
    let tuning = tune_product_parameters(eps)?;
    let product = oscillator_product_metric(&tuning, &region)?;
    let obsmap = obsmap_metric(chain_gramian(4, OBSMAP_THETA));
    let expected = vec![
        Expectation::new("obsmap", "a2", Verdict::Pass),
        Expectation::new("obsmap", "a3-nullity", Verdict::Fail),
        Expectation::new("product", "a2", Verdict::Pass),
        Expectation::new("product", "a3-nullity", Verdict::Pass),
        Expectation::new("product", "a3-direct", Verdict::Pass),
        Expectation::new("product", "submersion", Verdict::Pass),
    ];
    Ok(BenchmarkSpec {
        name: "oscillator".into(),
        description: format!(
            "frequency-modulated oscillator on the invariant shell with \
             parameter {eps}; tuned weights a={a:e}, b={b}, c={c}, certified \
             rate q={q:e}",
            a = tuning.a,
            b = tuning.b,
            c = tuning.c,
            q = tuning.q,
        ),
        model,
        region,
        metrics: vec![
            NamedMetric {
                name: "obsmap".into(),
                metric: obsmap,
                output_weight: MetricField::constant(nalgebra::dmatrix![1.0]),
                gap: GapFunction::from_constant(nalgebra::dmatrix![1.0])?,
            },
            NamedMetric {
                name: "product".into(),
                metric: product.metric,
                output_weight: MetricField::constant(nalgebra::dmatrix![
                    tuning.c
                ]),
                gap: GapFunction::from_constant(nalgebra::dmatrix![tuning.c])?,
            },
        ],
        expected,
        q_min: (tuning.q / 2.0).min(1e-6),
        sim: Some(SimDefaults {
            x0: vec![1.0, 0.3, 1.0],
            xh0: vec![1.08, 0.38, 0.97],
            dt: 0.01,
            horizon: 10.0,
            gain: 8.0,
            rate_target: tuning.q / 4.0,
            distance: DistanceMethod::Geodesic,
            stride: 20,
        }),
    })
}
