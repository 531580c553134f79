//! Differential detectability check: the Lie derivative of the metric
//! along the drift must be negative definite on the output-kernel
//! directions, uniformly over the region.

use crate::conditions::distributions::distributions;
use crate::conditions::region::Region;
use crate::conditions::report::{ConditionReport, Verdict, Witness};
use crate::error::{Error, Result};
use crate::geometry::{lie_derivative_metric, MetricField};
use crate::model::SystemModel;
use crate::num::linalg;

/// Estimate the decay rate `q`: at every sample the Lie derivative of `P`
/// along the drift is restricted to the kernel of the output jacobian and
/// compared against `P` through a generalized eigenvalue problem. The
/// reported margin is the worst admissible rate
/// `q_est = -max_x lambda_max(V^T (L_f P) V, V^T P V)`; the check passes
/// when `q_est >= q_min`.
///
/// With as many outputs as states the kernel is trivial and the condition
/// is vacuous: verdict pass, margin `None`.
pub fn check_a2(
    model: &SystemModel,
    p: &MetricField,
    region: &Region,
    samples: usize,
    seed: u64,
    q_min: f64,
) -> Result<ConditionReport> {
    let n = model.state_dim();
    let p_out = model.output_dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "metric dimension".into(),
            expected: n,
            got: p.dim(),
        });
    }
    if n == p_out {
        return Ok(ConditionReport {
            condition: "a2".into(),
            verdict: Verdict::Pass,
            margin: None,
            witness: None,
            samples: 0,
            seed,
            tolerance: q_min,
            inconclusive: None,
        });
    }
    let pts = region.sample(seed, samples)?;
    let mut worst: Option<(f64, Witness)> = None;
    for pt in &pts {
        let x = &pt.0;
        let l = lie_derivative_metric(p, model.drift(), x);
        let basis = distributions(p, model.output(), x)?;
        let v = &basis.tangent_basis;
        let a_r = v.transpose() * &l * v;
        let a_r = (&a_r + a_r.transpose()) * 0.5;
        let pm = p.eval(x);
        let b_r = v.transpose() * pm * v;
        let b_r = (&b_r + b_r.transpose()) * 0.5;
        let (lambda, dir_r) = linalg::gen_eig_max(&a_r, &b_r)?;
        if worst.as_ref().is_none_or(|(w, _)| lambda > *w) {
            let dir = v * dir_r;
            let nrm = dir.norm();
            let dir = if nrm > 0.0 { dir / nrm } else { dir };
            worst = Some((
                lambda,
                Witness {
                    point: x.clone(),
                    direction: dir.iter().cloned().collect(),
                },
            ));
        }
    }
    let (lambda_max, witness) = worst.expect("at least one sample");
    let q_est = -lambda_max;
    let verdict = if q_est >= q_min {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConditionReport {
        condition: "a2".into(),
        verdict,
        margin: Some(q_est),
        witness: Some(witness),
        samples: pts.len(),
        seed,
        tolerance: q_min,
        inconclusive: None,
    })
}

/// Reconstruct the smallest output-injection weight `rho` that makes the
/// full-space inequality `L_f P <= rho * dh^T dh - q * P` hold at `x`.
/// The left side is monotone in `rho`, so a doubling search followed by
/// bisection applies. Fails when no finite weight suffices, which happens
/// exactly when the kernel-restricted inequality itself fails.
pub fn rho_certificate(
    model: &SystemModel,
    p: &MetricField,
    x: &[f64],
    q: f64,
) -> Result<f64> {
    let l = lie_derivative_metric(p, model.drift(), x);
    let pm = p.eval(x);
    let dh = model.output().jacobian(x);
    let c = dh.transpose() * dh;
    let base = &l + &pm * q;
    let lambda_of = |rho: f64| -> f64 {
        let m = &base - &c * rho;
        let m = (&m + m.transpose()) * 0.5;
        linalg::sym_eig_extrema(&m).0
    };
    if lambda_of(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut iters = 0usize;
    while lambda_of(hi) > 0.0 {
        hi *= 2.0;
        iters += 1;
        if hi > 1e12 {
            return Err(Error::NoConvergence {
                residual: lambda_of(hi),
                iters,
            });
        }
    }
    let mut lo = hi * 0.5;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if lambda_of(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Convenience for tests: the kernel-restricted rate at one point.
pub fn a2_rate_at(
    model: &SystemModel,
    p: &MetricField,
    x: &[f64],
) -> Result<f64> {
    let l = lie_derivative_metric(p, model.drift(), x);
    let basis = distributions(p, model.output(), x)?;
    let v = &basis.tangent_basis;
    let a_r = v.transpose() * &l * v;
    let a_r = (&a_r + a_r.transpose()) * 0.5;
    let pm = p.eval(x);
    let b_r = v.transpose() * pm * v;
    let b_r = (&b_r + b_r.transpose()) * 0.5;
    let (lambda, _) = linalg::gen_eig_max(&a_r, &b_r)?;
    Ok(-lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::real::Real;
    use crate::smooth_map;
    use nalgebra::DMatrix;
    use crate::tol::Q_MIN_DEFAULT;

    fn chain_drift<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[1], S::zero()]
    }

    fn first_output<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0]]
    }

    fn chain_model() -> SystemModel {
        SystemModel::new(
            smooth_map!(2, 2, chain_drift),
            smooth_map!(2, 1, first_output),
        )
    }

    fn chain_metric() -> MetricField {
        MetricField::constant(DMatrix::from_row_slice(
            2,
            2,
            &[3.0, -3.0, -3.0, 6.0],
        ))
    }

    #[test]
    fn integrator_chain_rate_is_one() {
        // For this constant metric the kernel-restricted generalized
        // eigenvalue is exactly -1 at every point, so q_est = 1.
        let model = chain_model();
        let p = chain_metric();
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let r = check_a2(&model, &p, &region, 32, 0, Q_MIN_DEFAULT).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let q = r.margin.unwrap();
        assert!((q - 1.0).abs() < 1e-12, "q_est = {q}");
        assert!(r.witness.is_some());
    }

    fn zero_drift<S: Real>(x: &[S]) -> Vec<S> {
        vec![S::zero(); x.len()]
    }

    #[test]
    fn zero_drift_fails_at_default_threshold() {
        let model = SystemModel::new(
            smooth_map!(2, 2, zero_drift),
            smooth_map!(2, 1, first_output),
        );
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let r = check_a2(&model, &p, &region, 16, 0, Q_MIN_DEFAULT).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.margin.unwrap().abs() < 1e-12);
    }

    fn full_output<S: Real>(x: &[S]) -> Vec<S> {
        x.to_vec()
    }

    #[test]
    fn full_output_is_vacuous() {
        let model = SystemModel::new(
            smooth_map!(2, 2, chain_drift),
            smooth_map!(2, 2, full_output),
        );
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let r = check_a2(&model, &p, &region, 16, 0, Q_MIN_DEFAULT).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin.is_none());
    }

    #[test]
    fn rho_certificate_is_tight() {
        let model = chain_model();
        let p = chain_metric();
        let x = [0.2, -0.4];
        let q = 0.5;
        let rho = rho_certificate(&model, &p, &x, q).unwrap();
        assert!(rho > 0.0);
        // At rho the worst eigenvalue is at most zero; slightly below it
        // must be positive (minimality).
        let l = lie_derivative_metric(&p, model.drift(), &x);
        let pm = p.eval(&x);
        let dh = model.output().jacobian(&x);
        let c = dh.transpose() * dh;
        let at = |r: f64| {
            let m = &l + &pm * q - &c * r;
            linalg::sym_eig_extrema(&((&m + m.transpose()) * 0.5)).0
        };
        assert!(at(rho) <= 1e-9);
        assert!(at(rho * (1.0 - 1e-3)) > 0.0);
    }
}
