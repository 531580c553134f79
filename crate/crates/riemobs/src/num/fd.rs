//! Central finite differences, the fallback derivative path for callbacks
//! that are only available at `f64` precision.

use crate::tol::FD_STEP;

/// Per-coordinate step: `FD_STEP * (1 + |x_c|)`.
pub fn step(x_c: f64) -> f64 {
    FD_STEP * (1.0 + x_c.abs())
}

/// Central-difference jacobian of `f` at `x`; result is `n_out x n_in`,
/// flattened row-major.
pub fn jacobian(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    n_out: usize,
) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n_out * n];
    let mut xp = x.to_vec();
    for c in 0..n {
        let h = step(x[c]);
        xp[c] = x[c] + h;
        let fp = f(&xp);
        xp[c] = x[c] - h;
        let fm = f(&xp);
        xp[c] = x[c];
        for r in 0..n_out {
            out[r * n + c] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    out
}

/// Central-difference derivative of a matrix-valued function along
/// coordinate `c`.
pub fn matrix_deriv(
    m: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    c: usize,
) -> Vec<f64> {
    let h = step(x[c]);
    let mut xp = x.to_vec();
    xp[c] = x[c] + h;
    let mp = m(&xp);
    xp[c] = x[c] - h;
    let mm = m(&xp);
    mp.iter()
        .zip(mm.iter())
        .map(|(p, q)| (p - q) / (2.0 * h))
        .collect()
}

/// Second derivative `d2 f_i / dx_a dx_b` by nested central differences.
pub fn second_deriv(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    i: usize,
    a: usize,
    b: usize,
) -> f64 {
    let mut xp = x.to_vec();
    if a == b {
        let h = step(x[a]);
        xp[a] = x[a] + h;
        let fp = f(&xp)[i];
        xp[a] = x[a] - h;
        let fm = f(&xp)[i];
        xp[a] = x[a];
        let f0 = f(&xp)[i];
        (fp - 2.0 * f0 + fm) / (h * h)
    } else {
        let ha = step(x[a]);
        let hb = step(x[b]);
        let mut eval = |da: f64, db: f64| {
            xp[a] = x[a] + da;
            xp[b] = x[b] + db;
            let v = f(&xp)[i];
            xp[a] = x[a];
            xp[b] = x[b];
            v
        };
        (eval(ha, hb) - eval(ha, -hb) - eval(-ha, hb) + eval(-ha, -hb))
            / (4.0 * ha * hb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_of_polynomial() {
        let f = |x: &[f64]| vec![x[0] * x[0] * x[1], x[0] + 3.0 * x[1]];
        let x = [1.5, -0.5];
        let j = jacobian(&f, &x, 2);
        let expect = [2.0 * x[0] * x[1], x[0] * x[0], 1.0, 3.0];
        for (got, want) in j.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
    }

    #[test]
    fn mixed_second_derivative() {
        let f = |x: &[f64]| vec![x[0] * x[0] * x[1] + x[1] * x[1]];
        let x = [0.8, 1.2];
        let d = second_deriv(&f, &x, 0, 0, 1);
        assert!((d - 2.0 * x[0]).abs() < 1e-5);
        let d = second_deriv(&f, &x, 0, 1, 1);
        assert!((d - 2.0).abs() < 1e-4);
    }
}
