//! Geodesic monotonicity checks: the sufficient tensor-nullity test with
//! its block decomposition, the submersion property, and a direct
//! Monte-Carlo falsifier that differentiates the output gap along solved
//! geodesics.

use nalgebra::DMatrix;

use crate::conditions::distributions::distributions;
use crate::conditions::region::Region;
use crate::conditions::report::{ConditionReport, Verdict, Witness};
use crate::error::{Error, Result};
use crate::geometry::{
    christoffel, geodesic_bvp, second_fundamental_form, MetricField, SmoothMap,
};
use crate::model::SystemModel;
use crate::num::linalg;
use crate::observer::gap::GapFunction;
use crate::tol::ZERO_ERROR_TOL;

/// Block decomposition of the obstruction tensor at a point, taken against
/// the tangent basis `V` and the orth basis `W`: `tt = V^T II V`,
/// `oo = W^T II W`, `mixed = W^T II V`, one matrix per output component.
/// All three vanish exactly when the full tensor vanishes.
#[derive(Clone, Debug)]
pub struct SffBlocks {
    pub tt: Vec<DMatrix<f64>>,
    pub oo: Vec<DMatrix<f64>>,
    pub mixed: Vec<DMatrix<f64>>,
}

pub fn sff_blocks(
    p: &MetricField,
    q: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<SffBlocks> {
    let sff = second_fundamental_form(p, q, h, x)?;
    let basis = distributions(p, h, x)?;
    let v = &basis.tangent_basis;
    let w = &basis.orth_basis;
    let mut tt = Vec::with_capacity(sff.len());
    let mut oo = Vec::with_capacity(sff.len());
    let mut mixed = Vec::with_capacity(sff.len());
    for m in &sff {
        tt.push(v.transpose() * m * v);
        oo.push(w.transpose() * m * w);
        mixed.push(w.transpose() * m * v);
    }
    Ok(SffBlocks { tt, oo, mixed })
}

/// Size of the tensor ingredients at `x`, used to scale the nullity
/// tolerance so the verdict is invariant under rescaling the maps.
fn sff_scale(
    p: &MetricField,
    q: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<f64> {
    let dh = h.jacobian(x);
    let dh_norm = linalg::fro(&dh);
    let mut hess_norm = 0.0f64;
    for i in 0..h.n_out() {
        hess_norm = hess_norm.max(linalg::fro(&h.hessian_component(i, x)));
    }
    let gamma = christoffel(p, x)?;
    let y = h.eval(x);
    let delta = christoffel(q, &y)?;
    Ok(1.0
        + hess_norm
        + gamma.frobenius() * dh_norm
        + delta.frobenius() * dh_norm * dh_norm)
}

/// Sufficient monotonicity test: the obstruction tensor must vanish at
/// every sample. The margin is the largest scaled Frobenius norm found;
/// pass iff it stays below the tolerance.
pub fn check_a3_nullity(
    model: &SystemModel,
    p: &MetricField,
    q: &MetricField,
    region: &Region,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ConditionReport> {
    let h = model.output();
    let pts = region.sample(seed, samples)?;
    let mut worst: Option<(f64, Witness)> = None;
    for pt in &pts {
        let x = &pt.0;
        let sff = second_fundamental_form(p, q, h, x)?;
        let scale = sff_scale(p, q, h, x)?;
        let mut local = 0.0f64;
        let mut local_dir: Option<Vec<f64>> = None;
        for m in &sff {
            let nrm = linalg::fro(m) / scale;
            if nrm >= local {
                local = nrm;
                let sym = (m + m.transpose()) * 0.5;
                let eig = nalgebra::SymmetricEigen::new(sym);
                let (mut best_i, mut best_v) = (0, 0.0f64);
                for (i, ev) in eig.eigenvalues.iter().enumerate() {
                    if ev.abs() >= best_v {
                        best_v = ev.abs();
                        best_i = i;
                    }
                }
                local_dir =
                    Some(eig.eigenvectors.column(best_i).iter().cloned().collect());
            }
        }
        if worst.as_ref().is_none_or(|(w, _)| local > *w) {
            worst = Some((
                local,
                Witness {
                    point: x.clone(),
                    direction: local_dir.unwrap_or_else(|| vec![0.0; x.len()]),
                },
            ));
        }
    }
    let (margin, witness) = worst.expect("at least one sample");
    let verdict = if margin <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConditionReport {
        condition: "a3-nullity".into(),
        verdict,
        margin: Some(margin),
        witness: Some(witness),
        samples: pts.len(),
        seed,
        tolerance: tol,
        inconclusive: None,
    })
}

/// Check that the output map carries the state metric to `Q`: the inverse
/// output Gram matrix `(dh P^{-1} dh^T)^{-1}` must equal `Q(h(x))` at every
/// sample, relative to the size of `Q`.
pub fn check_submersion(
    p: &MetricField,
    q: &MetricField,
    h: &SmoothMap,
    region: &Region,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ConditionReport> {
    let pts = region.sample(seed, samples)?;
    let mut worst: Option<(f64, Witness)> = None;
    for pt in &pts {
        let x = &pt.0;
        let dh = h.jacobian(x);
        if linalg::rank(&dh) < h.n_out() {
            return Err(Error::RankDeficientOutput {
                rank: linalg::rank(&dh),
                expected: h.n_out(),
            });
        }
        let pinv = p.inverse_at(x)?;
        let gram = &dh * pinv * dh.transpose();
        let gram_inv = gram.try_inverse().ok_or(Error::SingularBlock {
            what: "output gram matrix".into(),
        })?;
        let y = h.eval(x);
        let qm = q.eval(&y);
        let resid = linalg::fro(&(&gram_inv - &qm)) / linalg::fro(&qm).max(1e-300);
        if worst.as_ref().is_none_or(|(w, _)| resid > *w) {
            worst = Some((
                resid,
                Witness {
                    point: x.clone(),
                    direction: vec![0.0; x.len()],
                },
            ));
        }
    }
    let (margin, witness) = worst.expect("at least one sample");
    let verdict = if margin <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConditionReport {
        condition: "submersion".into(),
        verdict,
        margin: Some(margin),
        witness: Some(witness),
        samples: pts.len(),
        seed,
        tolerance: tol,
        inconclusive: None,
    })
}

/// Options for the direct Monte-Carlo monotonicity probe.
#[derive(Clone)]
pub struct MonotonicityOptions {
    pub trials: usize,
    pub seed: u64,
    /// Derivatives below `-tol` (signed away from the anchor) falsify.
    pub tol: f64,
    /// Extra endpoint pairs checked before the random ones, typically
    /// produced by shooting through a nullity witness.
    pub probes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl MonotonicityOptions {
    pub fn new(trials: usize, seed: u64, tol: f64) -> Self {
        Self {
            trials,
            seed,
            tol,
            probes: Vec::new(),
        }
    }
}

/// Direct falsification of geodesic monotonicity: for sampled endpoint
/// pairs, solve the connecting geodesic and differentiate the output gap
/// to a set of anchor points along the curve. Moving away from an anchor
/// the gap must not decrease; a signed derivative below `-tol` (at
/// distinct outputs) is a counterexample. A pass only means "not
/// falsified". Geodesic solves that fail are counted as inconclusive
/// samples; when they are the majority the verdict is inconclusive.
pub fn check_geodesic_monotonicity_direct(
    p: &MetricField,
    q: &MetricField,
    h: &SmoothMap,
    region: &Region,
    opts: &MonotonicityOptions,
) -> Result<ConditionReport> {
    // Establish the gap function from the output metric.
    let probe_pts = region.sample(opts.seed ^ 0xa5a5, 8)?;
    let outputs: Vec<Vec<f64>> = probe_pts.iter().map(|pt| h.eval(&pt.0)).collect();
    let gap = GapFunction::try_from_metric(q, &outputs)?;
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = opts.probes.clone();
    for (a, b) in region.sample_pairs(opts.seed, opts.trials)? {
        pairs.push((a.0, b.0));
    }
    let mut skipped = 0usize;
    let mut worst: Option<(f64, Witness)> = None;
    for (a, b) in &pairs {
        let g = match geodesic_bvp(p, a, b, None) {
            Ok(g) => g,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let m = g.s.len();
        let anchors = [0, m / 4, m / 2, 3 * m / 4, m - 1];
        let ys: Vec<Vec<f64>> = g.points.iter().map(|x| h.eval(x)).collect();
        for &ia in &anchors {
            let ya = &ys[ia];
            let floor = ZERO_ERROR_TOL
                * (1.0 + ya.iter().map(|v| v.abs()).fold(0.0, f64::max));
            for k in 0..m {
                if k == ia {
                    continue;
                }
                let out_gap: f64 = ys[k]
                    .iter()
                    .zip(ya)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                if out_gap <= floor {
                    continue;
                }
                let grad = gap.grad1(&ys[k], ya);
                let dh = h.jacobian(&g.points[k]);
                let vel = &g.velocities[k];
                let mut phi_dot = 0.0;
                for (i, gi) in grad.iter().enumerate() {
                    let mut row = 0.0;
                    for (j, vj) in vel.iter().enumerate() {
                        row += dh[(i, j)] * vj;
                    }
                    phi_dot += gi * row;
                }
                let signed = if g.s[k] > g.s[ia] { phi_dot } else { -phi_dot };
                if worst.as_ref().is_none_or(|(w, _)| signed < *w) {
                    worst = Some((
                        signed,
                        Witness {
                            point: g.points[k].clone(),
                            direction: vel.clone(),
                        },
                    ));
                }
            }
        }
    }
    let total = pairs.len();
    let (margin, witness) = match worst {
        Some(w) => w,
        None => {
            return Ok(ConditionReport {
                condition: "a3-direct".into(),
                verdict: Verdict::Inconclusive,
                margin: None,
                witness: None,
                samples: total,
                seed: opts.seed,
                tolerance: opts.tol,
                inconclusive: Some(skipped),
            })
        }
    };
    let falsified = margin < -opts.tol;
    let verdict = if falsified {
        Verdict::Fail
    } else if skipped * 2 > total {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(ConditionReport {
        condition: "a3-direct".into(),
        verdict,
        margin: Some(margin),
        witness: Some(witness),
        samples: total,
        seed: opts.seed,
        tolerance: opts.tol,
        inconclusive: if skipped > 0 { Some(skipped) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_field;
    use crate::num::real::Real;
    use crate::smooth_map;
    use crate::tol::{MONOTONICITY_TOL, NULLITY_TOL, SUBMERSION_TOL};

    fn lin_out<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0]]
    }

    fn lin_drift<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[1], S::zero()]
    }

    #[test]
    fn linear_quadratic_nullity_margin_is_exact_zero() {
        let model = SystemModel::new(
            smooth_map!(2, 2, lin_drift),
            smooth_map!(2, 1, lin_out),
        );
        let p = MetricField::constant(DMatrix::from_row_slice(
            2,
            2,
            &[3.0, -3.0, -3.0, 6.0],
        ));
        let q = MetricField::constant(DMatrix::from_row_slice(1, 1, &[2.0]));
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let r =
            check_a3_nullity(&model, &p, &q, &region, 64, 0, NULLITY_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.margin.unwrap(), 0.0);
    }

    fn curved_out<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0] - x[1] * x[1]]
    }

    #[test]
    fn curved_output_euclidean_metric_fails_nullity() {
        let model = SystemModel::new(
            smooth_map!(2, 2, lin_drift),
            smooth_map!(2, 1, curved_out),
        );
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let q = MetricField::constant(DMatrix::identity(1, 1));
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let r =
            check_a3_nullity(&model, &p, &q, &region, 32, 0, NULLITY_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.margin.unwrap() > 0.1);
        assert!(r.witness.is_some());
    }

    #[test]
    fn blocks_reassemble_full_tensor() {
        // On a generic curved example the three blocks must contain the
        // whole tensor: conjugating by the stacked basis [V W] and
        // comparing against the blockwise assembly is an identity.
        fn curved_metric<S: Real>(x: &[S]) -> Vec<S> {
            let c = x[0] * x[1] * S::lift(0.2);
            vec![S::lift(2.0) + x[1] * x[1], c, c, S::one() + x[0] * x[0]]
        }
        let p = metric_field!(2, curved_metric);
        let q = MetricField::constant(DMatrix::from_row_slice(1, 1, &[1.5]));
        let h = smooth_map!(2, 1, curved_out);
        let x = [0.4, -0.6];
        let blocks = sff_blocks(&p, &q, &h, &x).unwrap();
        let sff = second_fundamental_form(&p, &q, &h, &x).unwrap();
        let basis = distributions(&p, &h, &x).unwrap();
        let n = 2;
        let mut b = DMatrix::zeros(n, n);
        b.view_mut((0, 0), (n, 1)).copy_from(&basis.tangent_basis);
        b.view_mut((0, 1), (n, 1)).copy_from(&basis.orth_basis);
        for i in 0..1 {
            let full = b.transpose() * &sff[i] * &b;
            assert!((full[(0, 0)] - blocks.tt[i][(0, 0)]).abs() < 1e-12);
            assert!((full[(1, 1)] - blocks.oo[i][(0, 0)]).abs() < 1e-12);
            assert!((full[(1, 0)] - blocks.mixed[i][(0, 0)]).abs() < 1e-12);
        }
    }

    #[test]
    fn submersion_trivial_pass_and_generic_fail() {
        let h = smooth_map!(2, 1, lin_out);
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let q = MetricField::constant(DMatrix::identity(1, 1));
        let p_id = MetricField::constant(DMatrix::identity(2, 2));
        let r = check_submersion(&p_id, &q, &h, &region, 16, 0, SUBMERSION_TOL)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let p_gen = MetricField::constant(DMatrix::from_row_slice(
            2,
            2,
            &[2.0, 0.3, 0.3, 1.0],
        ));
        let r = check_submersion(&p_gen, &q, &h, &region, 16, 0, SUBMERSION_TOL)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn straight_line_gap_is_monotone_for_linear_output() {
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let q = MetricField::constant(DMatrix::identity(1, 1));
        let h = smooth_map!(2, 1, lin_out);
        let region = Region::rect(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let opts = MonotonicityOptions::new(6, 0, MONOTONICITY_TOL);
        let r =
            check_geodesic_monotonicity_direct(&p, &q, &h, &region, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin.unwrap() >= -MONOTONICITY_TOL);
    }

    #[test]
    fn curved_output_is_falsified_through_probe() {
        // Straight-line geodesics of the identity metric; the output
        // x0 - x1^2 decreases again past the vertex of the parabola, so the
        // vertical probe pair must produce a negative signed derivative.
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let q = MetricField::constant(DMatrix::identity(1, 1));
        let h = smooth_map!(2, 1, curved_out);
        let region = Region::rect(vec![-0.5, -1.2], vec![0.5, 1.2]);
        let mut opts = MonotonicityOptions::new(2, 0, MONOTONICITY_TOL);
        opts.probes = vec![(vec![0.0, -1.0], vec![0.0, 1.0])];
        let r =
            check_geodesic_monotonicity_direct(&p, &q, &h, &region, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.margin.unwrap() < -0.5);
    }
}
