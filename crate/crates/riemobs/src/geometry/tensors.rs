//! Tensor calculus on a metric field: Christoffel symbols, Lie derivative
//! of the metric, Riemannian gradient and Hessian of an output map, and a
//! curvature component.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::geometry::fields::{MetricField, SmoothMap};
use crate::num::fd;

/// Christoffel symbols of the second kind at a point; `gamma(c, a, b)` is
/// the coefficient with upper index `c`, symmetric in `(a, b)`.
#[derive(Clone, Debug)]
pub struct ChristoffelTensor {
    pub n: usize,
    g: Vec<f64>,
}

impl ChristoffelTensor {
    #[inline]
    pub fn gamma(&self, c: usize, a: usize, b: usize) -> f64 {
        self.g[(c * self.n + a) * self.n + b]
    }

    pub fn frobenius(&self) -> f64 {
        self.g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Contraction `sum_{ab} gamma(c,a,b) u_a v_b` for each upper index `c`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|c| {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += self.gamma(c, a, b) * u[a] * v[b];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Christoffel symbols from the metric and its first derivatives:
/// `Gamma^c_ab = 1/2 sum_d (P^{-1})_cd (dP_ad/dx_b + dP_bd/dx_a - dP_ab/dx_d)`.
pub fn christoffel(p: &MetricField, x: &[f64]) -> Result<ChristoffelTensor> {
    let n = p.dim();
    let pinv = p.inverse_at(x)?;
    let dp: Vec<DMatrix<f64>> = (0..n).map(|c| p.deval(x, c)).collect();
    let mut g = vec![0.0; n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut acc = 0.0;
                for d in 0..n {
                    acc += pinv[(c, d)]
                        * (dp[b][(a, d)] + dp[a][(b, d)] - dp[d][(a, b)]);
                }
                g[(c * n + a) * n + b] = 0.5 * acc;
            }
        }
    }
    Ok(ChristoffelTensor { n, g })
}

/// Lie derivative of the metric along the vector field `f`:
/// `(L_f P)_ab = sum_c (dP_ab/dx_c f_c + P_ac df_c/dx_b + P_bc df_c/dx_a)`.
pub fn lie_derivative_metric(
    p: &MetricField,
    f: &SmoothMap,
    x: &[f64],
) -> DMatrix<f64> {
    let n = p.dim();
    let pm = p.eval(x);
    let fv = f.eval(x);
    let jf = f.jacobian(x);
    let mut out = DMatrix::zeros(n, n);
    for c in 0..n {
        let dp = p.deval(x, c);
        out += dp * fv[c];
    }
    let pj = &pm * &jf;
    out += &pj + pj.transpose();
    out
}

/// Riemannian gradient of each output component: the `n x p` matrix
/// `P^{-1} dh^T`.
pub fn riemannian_gradient(
    p: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<DMatrix<f64>> {
    let pinv = p.inverse_at(x)?;
    let jh = h.jacobian(x);
    Ok(pinv * jh.transpose())
}

/// Riemannian Hessian of each output component:
/// `(H_i)_ab = d2h_i/dx_a dx_b - sum_c Gamma^c_ab dh_i/dx_c`.
pub fn riemannian_hessian(
    p: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<Vec<DMatrix<f64>>> {
    let n = p.dim();
    let gamma = christoffel(p, x)?;
    let jh = h.jacobian(x);
    let mut out = Vec::with_capacity(h.n_out());
    for i in 0..h.n_out() {
        let mut hi = h.hessian_component(i, x);
        for a in 0..n {
            for b in 0..n {
                let mut corr = 0.0;
                for c in 0..n {
                    corr += gamma.gamma(c, a, b) * jh[(i, c)];
                }
                hi[(a, b)] -= corr;
            }
        }
        out.push(hi);
    }
    Ok(out)
}

/// Curvature component `R^u_{i j k} = d_j Gamma^u_{k i} - d_k Gamma^u_{j i}
/// + sum_e (Gamma^u_{j e} Gamma^e_{k i} - Gamma^u_{k e} Gamma^e_{j i})`.
///
/// Derivatives of the Christoffel field are taken by central differences.
/// For a two-index-pair component such as `(u, i, j, k) = (a, b, a, b)` this
/// reduces, when only few symbols are nonzero, to the familiar
/// `dGamma^a_bb/dx_a - Gamma^a_bb Gamma^b_ab` pattern.
pub fn curvature_component(
    p: &MetricField,
    x: &[f64],
    idx: (usize, usize, usize, usize),
) -> Result<f64> {
    let (u, i, j, k) = idx;
    let n = p.dim();
    let gamma0 = christoffel(p, x)?;
    let dgamma = |c: usize, along: usize| -> Result<f64> {
        // d/dx_along of Gamma^u_{c i} via central differences.
        let h = fd::step(x[along]);
        let mut xp = x.to_vec();
        xp[along] = x[along] + h;
        let gp = christoffel(p, &xp)?;
        xp[along] = x[along] - h;
        let gm = christoffel(p, &xp)?;
        Ok((gp.gamma(u, c, i) - gm.gamma(u, c, i)) / (2.0 * h))
    };
    let mut r = dgamma(k, j)? - dgamma(j, k)?;
    for e in 0..n {
        r += gamma0.gamma(u, j, e) * gamma0.gamma(e, k, i)
            - gamma0.gamma(u, k, e) * gamma0.gamma(e, j, i);
    }
    Ok(r)
}

/// Scalar curvature: the metric trace of the Ricci tensor
/// `Ric_ik = sum_u R^u_{i u k}`, with the same component convention as
/// `curvature_component`. For a surface this is twice the Gaussian
/// curvature; flat factors contribute nothing.
pub fn scalar_curvature(p: &MetricField, x: &[f64]) -> Result<f64> {
    let n = p.dim();
    let pinv = p.inverse_at(x)?;
    let gamma0 = christoffel(p, x)?;
    // Christoffel field at x +- h along each coordinate, shared across all
    // the derivative terms below.
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    for a in 0..n {
        let h = fd::step(x[a]);
        let mut xp = x.to_vec();
        xp[a] = x[a] + h;
        plus.push(christoffel(p, &xp)?);
        xp[a] = x[a] - h;
        minus.push(christoffel(p, &xp)?);
        steps.push(h);
    }
    let dgamma = |u: usize, a: usize, b: usize, along: usize| -> f64 {
        (plus[along].gamma(u, a, b) - minus[along].gamma(u, a, b))
            / (2.0 * steps[along])
    };
    let mut scalar = 0.0;
    for i in 0..n {
        for k in 0..n {
            let mut ric = 0.0;
            for u in 0..n {
                ric += dgamma(u, k, i, u) - dgamma(u, u, i, k);
                for e in 0..n {
                    ric += gamma0.gamma(u, u, e) * gamma0.gamma(e, k, i)
                        - gamma0.gamma(u, k, e) * gamma0.gamma(e, u, i);
                }
            }
            scalar += pinv[(i, k)] * ric;
        }
    }
    Ok(scalar)
}
