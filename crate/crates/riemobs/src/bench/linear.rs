//! Linear benchmark: drift `A x`, output `H x`, constant quadratic metric
//! and output weight.

use nalgebra::DMatrix;

use crate::bench::{BenchmarkSpec, Expectation, NamedMetric, SimDefaults};
use crate::conditions::{Region, Verdict};
use crate::error::{Error, Result};
use crate::geometry::{MetricField, SmoothMap};
use crate::model::SystemModel;
use crate::num::real::Real;
use crate::observer::{DistanceMethod, GapFunction};

/// Matrix pair as a parameterized linear map `x -> M x`.
fn linear_apply<S: Real>(m: &DMatrix<f64>, x: &[S]) -> Vec<S> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| S::lift(m[(i, j)]) * x[j])
                .fold(S::zero(), |acc, t| acc + t)
        })
        .collect()
}

fn linear_map(m: DMatrix<f64>) -> SmoothMap {
    let (rows, cols) = (m.nrows(), m.ncols());
    crate::smooth_map_with!(cols, rows, m, linear_apply)
}

/// Solve `A^T P + P A + q P = sigma H^T H` for a symmetric `P` and reject
/// non-SPD solutions. Vectorized as a dense linear system.
pub fn solve_detectability_metric(
    a: &DMatrix<f64>,
    h: &DMatrix<f64>,
    sigma: f64,
    q: f64,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "drift/output matrices".into(),
            expected: n,
            got: a.ncols().max(h.ncols()),
        });
    }
    let nn = n * n;
    let mut sys = DMatrix::zeros(nn, nn);
    // Column-major vectorization: vec(A^T P) = (I (x) A^T) vec(P),
    // vec(P A) = (A^T (x) I) vec(P).
    for col in 0..n {
        for row in 0..n {
            let r = col * n + row;
            for k in 0..n {
                sys[(r, col * n + k)] += a[(k, row)];
                sys[(r, k * n + row)] += a[(k, col)];
            }
            sys[(r, col * n + row)] += q;
        }
    }
    let hh = sigma * h.transpose() * h;
    let rhs =
        nalgebra::DVector::from_iterator(nn, hh.as_slice().iter().copied());
    let lu = sys.lu();
    let sol = lu.solve(&rhs).ok_or(Error::SingularJacobian)?;
    let p = DMatrix::from_iterator(n, n, sol.iter().copied());
    let p = 0.5 * (&p + p.transpose());
    crate::num::linalg::spd_cholesky(&p)?;
    Ok(p)
}

/// Assemble the linear benchmark from its four constant matrices.
pub fn linear_quadratic(
    a: DMatrix<f64>,
    h: DMatrix<f64>,
    p_const: DMatrix<f64>,
    q_const: DMatrix<f64>,
) -> Result<BenchmarkSpec> {
    let n = a.nrows();
    let p_out = h.nrows();
    if a.ncols() != n || h.ncols() != n || p_const.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "linear benchmark matrices".into(),
            expected: n,
            got: a.ncols().max(h.ncols()).max(p_const.nrows()),
        });
    }
    if q_const.nrows() != p_out {
        return Err(Error::DimensionMismatch {
            what: "output weight".into(),
            expected: p_out,
            got: q_const.nrows(),
        });
    }
    let model = SystemModel::new(linear_map(a), linear_map(h));
    let metric = MetricField::constant(p_const);
    let output_weight = MetricField::constant(q_const.clone());
    let gap = GapFunction::from_constant(q_const)?;
    let region = Region::rect(vec![-5.0; n], vec![5.0; n]);
    Ok(BenchmarkSpec {
        name: "linear".into(),
        description: "constant-coefficient system with a constant quadratic \
                      metric; the correction reduces to a constant-gain \
                      output injection"
            .into(),
        model,
        region,
        metrics: vec![NamedMetric {
            name: "constant".into(),
            metric,
            output_weight,
            gap,
        }],
        expected: vec![
            Expectation::new("constant", "a2", Verdict::Pass),
            Expectation::new("constant", "a3-nullity", Verdict::Pass),
            Expectation::new("constant", "a3-direct", Verdict::Pass),
        ],
        q_min: 1e-6,
        sim: Some(SimDefaults {
            x0: vec![0.3, -0.2],
            xh0: vec![1.0, 0.6],
            dt: 0.01,
            horizon: 4.0,
            gain: 2.0,
            rate_target: 0.25,
            distance: DistanceMethod::ConstantMetric,
            stride: 1,
        }),
    })
}

/// Default instance: double integrator with unit output weight and the
/// reference metric whose kernel-restricted decay rate is exactly one.
pub fn default_linear() -> BenchmarkSpec {
    let a = nalgebra::dmatrix![0.0, 1.0; 0.0, 0.0];
    let h = nalgebra::dmatrix![1.0, 0.0];
    let p = nalgebra::dmatrix![3.0, -3.0; -3.0, 6.0];
    let q = nalgebra::dmatrix![1.0];
    linear_quadratic(a, h, p, q).expect("reference matrices are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_a2;

    const TOL: f64 = 1e-9;

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = nalgebra::dmatrix![0.0, 1.0; 0.0, 0.0];
        let h = nalgebra::dmatrix![1.0];
        let p = nalgebra::dmatrix![1.0, 0.0; 0.0, 1.0];
        let q = nalgebra::dmatrix![1.0];
        assert!(matches!(
            linear_quadratic(a, h, p, q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn solved_metric_satisfies_the_linear_identity() {
        let a = nalgebra::dmatrix![0.0, 1.0; 0.0, 0.0];
        let h = nalgebra::dmatrix![1.0, 0.0];
        let (sigma, q) = (3.0, 1.0);
        let p = solve_detectability_metric(&a, &h, sigma, q).unwrap();
        let res = a.transpose() * &p + &p * &a + q * &p
            - sigma * h.transpose() * &h;
        assert!(res.amax() < TOL, "residual {}", res.amax());
    }

    #[test]
    fn solved_metric_passes_a2_at_its_design_rate() {
        let a = nalgebra::dmatrix![0.0, 1.0; 0.0, 0.0];
        let h = nalgebra::dmatrix![1.0, 0.0];
        let p = solve_detectability_metric(&a, &h, 3.0, 1.0).unwrap();
        let bench = linear_quadratic(
            a,
            h,
            p,
            nalgebra::dmatrix![1.0],
        )
        .unwrap();
        let report = check_a2(
            &bench.model,
            &bench.metrics[0].metric,
            &bench.region,
            128,
            0,
            1e-6,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        // Full-space identity restricts to rate exactly q on the kernel.
        assert!((report.margin.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn default_instance_has_unit_rate() {
        let bench = default_linear();
        let report = check_a2(
            &bench.model,
            &bench.metrics[0].metric,
            &bench.region,
            64,
            0,
            bench.q_min,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!((report.margin.unwrap() - 1.0).abs() < 1e-9);
    }
}
