//! Distance-contraction certification for observer runs, decay-rate
//! fitting, and the gain scan / gain-margin probes.

use nalgebra::DVector;

use crate::conditions::{ConditionReport, Region, Verdict, Witness};
use crate::error::{Error, Result};
use crate::geometry::{geodesic_bvp, InsideFn, MetricField};
use crate::model::SystemModel;
use crate::observer::sim::{
    simulate, Gain, ObserverConfig, ObserverRun, ZERO_DISTANCE_FLOOR,
};
use crate::observer::GapFunction;

/// Multiplicative slack on the per-step contraction envelope.
pub const CONTRACTION_SLACK: f64 = 1e-3;
/// Minimum number of recorded distance samples for a certificate.
pub const MIN_CERTIFICATE_SAMPLES: usize = 10;
/// Gain scan upper exponent: gains 2^0 .. 2^10.
const GAIN_SCAN_MAX_EXP: u32 = 10;

/// A certificate decision together with the first envelope violation time.
pub struct CertificateOutcome {
    pub report: ConditionReport,
    pub first_violation: Option<f64>,
    pub rate: f64,
}

/// Check the forward-difference contraction envelope
/// `d(t_{k+1}) <= d(t_k) e^{-rate dt} (1 + slack)` over consecutive
/// recorded samples. Sandwich-bound runs are checked conservatively:
/// the later upper bound against the earlier lower bound.
pub fn contraction_certificate(
    run: &ObserverRun,
    rate: f64,
) -> Result<CertificateOutcome> {
    if !run.valid {
        let at = run.exit.map(|e| e.time).unwrap_or(0.0);
        return Err(Error::LeftRegion { at });
    }
    let upper = run.distance_samples();
    if upper.len() < MIN_CERTIFICATE_SAMPLES {
        return Err(Error::InsufficientSamples {
            have: upper.len(),
            need: MIN_CERTIFICATE_SAMPLES,
        });
    }
    let lower_of = |idx: usize| -> f64 {
        match &run.lower_bounds {
            Some(lows) => lows[idx].unwrap_or(run.distances[idx].unwrap()),
            None => run.distances[idx].unwrap(),
        }
    };
    let mut margin: Option<f64> = None;
    let mut violation: Option<usize> = None;
    for w in upper.windows(2) {
        let (i, _) = w[0];
        let (j, d_next) = w[1];
        let d_prev = lower_of(i);
        let dt = run.times[j] - run.times[i];
        let envelope = (-rate * dt).exp() * (1.0 + CONTRACTION_SLACK);
        if d_prev <= ZERO_DISTANCE_FLOOR {
            if d_next > ZERO_DISTANCE_FLOOR {
                violation = Some(j);
                break;
            }
            continue;
        }
        let slack = envelope - d_next / d_prev;
        margin = Some(margin.map_or(slack, |m: f64| m.min(slack)));
        if slack < 0.0 {
            violation = Some(j);
            break;
        }
    }
    let (verdict, witness) = match violation {
        Some(j) => {
            let x = &run.states[j];
            let xh = &run.estimates[j];
            let dir: Vec<f64> = xh.iter().zip(x).map(|(a, b)| a - b).collect();
            (
                Verdict::Fail,
                Some(Witness {
                    point: xh.clone(),
                    direction: dir,
                }),
            )
        }
        None => (Verdict::Pass, None),
    };
    let report = ConditionReport {
        condition: "distance-contraction".into(),
        verdict,
        margin,
        witness,
        samples: upper.len(),
        seed: 0,
        tolerance: CONTRACTION_SLACK,
        inconclusive: None,
    };
    Ok(CertificateOutcome {
        report,
        first_violation: violation.map(|j| run.times[j]),
        rate,
    })
}

/// Least-squares exponential decay rate of the distance series: fits
/// `log d = c - lambda t` over positive samples and returns `lambda`.
/// `None` when fewer than two positive samples exist.
pub fn fit_decay_rate(run: &ObserverRun) -> Option<f64> {
    let pts: Vec<(f64, f64)> = run
        .distance_samples()
        .into_iter()
        .filter(|&(_, d)| d > ZERO_DISTANCE_FLOOR)
        .map(|(i, d)| (run.times[i], d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let st: f64 = pts.iter().map(|p| p.0).sum();
    let sl: f64 = pts.iter().map(|p| p.1).sum();
    let stt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let stl: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-30 {
        return None;
    }
    let slope = (n * stl - st * sl) / denom;
    Some(-slope)
}

/// Pair the end velocity of the geodesic from `x` to `xh` with the
/// (unsigned) gradient correction at `xh`, scaled by `scale`. Output
/// monotonicity of the metric predicts a nonnegative value whose sign
/// does not depend on the gain or the scale.
pub fn gain_margin_probe(
    model: &SystemModel,
    p: &MetricField,
    gap: &GapFunction,
    k_e: f64,
    scale: f64,
    x: &[f64],
    xh: &[f64],
    inside: Option<InsideFn>,
) -> Result<f64> {
    assert!(scale >= 1.0);
    if x == xh {
        return Ok(0.0);
    }
    let geo = geodesic_bvp(p, x, xh, inside)?;
    let v_end = DVector::from_column_slice(geo.velocities.last().unwrap());
    let pinv = p.inverse_at(xh)?;
    let dh = model.output().jacobian(xh);
    let yh = model.output().eval(xh);
    let y = model.output().eval(x);
    let g1 = DVector::from_vec(gap.grad1(&yh, &y));
    let corr = k_e * scale * pinv * dh.transpose() * g1;
    let pm = p.eval(xh);
    Ok((v_end.transpose() * pm * corr)[(0, 0)])
}

/// Result of scanning constant gains 2^0 .. 2^10.
pub struct GainScan {
    /// `(gain, verdict)` per scanned gain; inconclusive marks runs whose
    /// certificate could not be evaluated (truncation, too few samples).
    pub table: Vec<(f64, Verdict)>,
    /// Smallest gain whose run certified contraction at the target rate.
    pub chosen: Option<f64>,
}

/// Simulate with each gain in the doubling ladder and certify against the
/// config's target rate; returns the full table and the smallest passing
/// gain.
pub fn scan_gain(
    model: &SystemModel,
    p: &MetricField,
    gap: &GapFunction,
    cfg: &ObserverConfig,
    region: &Region,
    x0: &[f64],
    xh0: &[f64],
) -> Result<GainScan> {
    let mut table = Vec::new();
    let mut chosen = None;
    for e in 0..=GAIN_SCAN_MAX_EXP {
        let k = (2.0f64).powi(e as i32);
        let mut run_cfg = cfg.clone();
        run_cfg.gain = Gain::Constant(k);
        let verdict = match simulate(model, p, gap, &run_cfg, region, x0, xh0) {
            Ok(run) => match contraction_certificate(&run, cfg.rate_target) {
                Ok(out) => out.report.verdict,
                Err(_) => Verdict::Inconclusive,
            },
            Err(Error::Config(msg)) => return Err(Error::Config(msg)),
            Err(_) => Verdict::Inconclusive,
        };
        if verdict == Verdict::Pass && chosen.is_none() {
            chosen = Some(k);
        }
        table.push((k, verdict));
    }
    Ok(GainScan { table, chosen })
}
