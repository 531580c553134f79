//! Metric modification: adjust a metric in the output directions so the
//! output map becomes a Riemannian submersion onto `(Q, output space)`,
//! without touching the tangent distribution, the orthogonal distribution
//! or the detectability margin.

use std::sync::Arc;

use crate::geometry::{MetricField, SmoothMap};
use crate::num::real::D1;

/// Build `P_mod(x) = P(x) + dh^T [ Q(h(x)) - (dh P^{-1} dh^T)^{-1} ] dh`.
///
/// The result is assembled lazily from the ingredient fields, so it stays a
/// first-class smooth metric (Christoffel symbols of the result use exact
/// dual derivatives whenever `P`, `Q` and `h` all provide them). Applying
/// the transform twice is a no-op: once the inverse output Gram matrix
/// equals `Q`, the bracket vanishes.
///
/// The closures expect `P` SPD and `dh` full rank wherever they are
/// evaluated; violations surface as panics with explicit messages, so
/// callers validate regions up front (`MetricField::validate_at`,
/// `check_submersion`).
pub fn p_mod(p: &MetricField, q: &MetricField, h: &SmoothMap) -> MetricField {
    let n = p.dim();
    assert_eq!(h.n_in(), n, "output map domain mismatch");
    let p0 = p.clone();
    let q0 = q.clone();
    let h0 = h.clone();
    let m0 = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let pm = p0.eval(x);
        let pinv = p0
            .inverse_at(x)
            .expect("base metric positive definite");
        let dh = h0.jacobian(x);
        let gram = &dh * pinv * dh.transpose();
        let gram_inv = gram
            .try_inverse()
            .expect("output map full rank under base metric");
        let y = h0.eval(x);
        let qm = q0.eval(&y);
        let out = &pm + dh.transpose() * (qm - gram_inv) * dh;
        let out = (&out + out.transpose()) * 0.5;
        (0..n * n).map(|k| out[(k / n, k % n)]).collect()
    });
    let exact = p.has_exact_derivatives()
        && q.has_exact_derivatives()
        && h.has_exact_derivatives();
    if !exact {
        return MetricField::from_f64(n, m0);
    }
    let p1 = p.clone();
    let q1 = q.clone();
    let h1 = h.clone();
    let m1 = Arc::new(move |x: &[D1]| -> Vec<D1> {
        let pm = p1.eval_d1(x).expect("metric dual level");
        let pinv = pm.inv().expect("base metric invertible");
        let dh = h1.jacobian_d1(x).expect("output jacobian dual level");
        let gram = dh.mul(&pinv).mul(&dh.t());
        let gram_inv = gram.inv().expect("output gram invertible");
        let y = h1.eval_d1(x).expect("output dual level");
        let qm = q1.eval_d1(&y).expect("output metric dual level");
        let bracket = qm.sub(&gram_inv);
        let out = pm.add(&dh.t().mul(&bracket).mul(&dh));
        let sym = out.add(&out.t()).scale(D1::new(0.5, 0.0));
        sym.data().to_vec()
    });
    MetricField::from_levels(n, m0, Some(m1), None)
}
