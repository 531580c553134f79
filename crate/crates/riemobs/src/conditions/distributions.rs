//! Output-adapted splitting of the tangent space: directions tangent to
//! output level sets and their metric-orthogonal complement.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::geometry::{MetricField, SmoothMap};
use crate::num::linalg;
use crate::tol::{P_ORTHOGONALITY_TOL, TANGENT_BASIS_TOL};

/// Bases of the two canonical distributions at a point: `tangent_basis`
/// spans the kernel of the output jacobian (`n x (n-p)`, orthonormal) and
/// `orth_basis = P^{-1} dh^T` spans its metric-orthogonal complement
/// (`n x p`).
#[derive(Clone, Debug)]
pub struct DistributionBasis {
    pub tangent_basis: DMatrix<f64>,
    pub orth_basis: DMatrix<f64>,
}

/// Compute both distribution bases at `x`. The construction guarantees
/// `dh * tangent = 0` and `tangent^T P orth = 0`; both identities are
/// re-checked here so silent numerical degradation surfaces as a panic in
/// debug builds.
pub fn distributions(
    p: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<DistributionBasis> {
    let p_out = h.n_out();
    let dh = h.jacobian(x);
    let tangent = linalg::null_space(&dh, p_out)?;
    let pinv = p.inverse_at(x)?;
    let orth = &pinv * dh.transpose();
    debug_assert!(
        (&dh * &tangent).amax() <= TANGENT_BASIS_TOL * (1.0 + dh.amax()),
        "tangent basis not in output kernel"
    );
    let pm = p.eval(x);
    let cross = tangent.transpose() * pm * &orth;
    debug_assert!(
        cross.amax() <= P_ORTHOGONALITY_TOL * (1.0 + dh.amax()).powi(2),
        "distribution bases not metric-orthogonal: {}",
        cross.amax()
    );
    let _ = cross;
    Ok(DistributionBasis {
        tangent_basis: tangent,
        orth_basis: orth,
    })
}

/// Oblique projector `I - P^{-1} dh^T (dh P^{-1} dh^T)^{-1} dh` onto the
/// tangent distribution along the orthogonal one. Annihilates the orth
/// basis and fixes the tangent basis.
pub fn tangent_projector(
    p: &MetricField,
    h: &SmoothMap,
    x: &[f64],
) -> Result<DMatrix<f64>> {
    let n = h.n_in();
    let dh = h.jacobian(x);
    let pinv = p.inverse_at(x)?;
    let gram = &dh * &pinv * dh.transpose();
    let gram_inv = gram
        .try_inverse()
        .ok_or(crate::error::Error::SingularBlock {
            what: "output gram matrix".into(),
        })?;
    Ok(DMatrix::identity(n, n) - pinv * dh.transpose() * gram_inv * dh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_field;
    use crate::num::real::Real;
    use crate::smooth_map;

    fn h_first<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0]]
    }

    #[test]
    fn identity_metric_linear_output() {
        let p = MetricField::constant(DMatrix::identity(2, 2));
        let h = smooth_map!(2, 1, h_first);
        let b = distributions(&p, &h, &[0.3, -0.8]).unwrap();
        // Tangent span {e2}, orth span {e1}.
        assert!((b.tangent_basis[(0, 0)]).abs() < 1e-12);
        assert!((b.tangent_basis[(1, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((b.orth_basis[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(b.orth_basis[(1, 0)].abs() < 1e-12);
    }

    fn curved_metric<S: Real>(x: &[S]) -> Vec<S> {
        let c = x[0] * x[1] * S::lift(0.3);
        vec![S::lift(2.0) + x[1] * x[1], c, c, S::one() + x[0] * x[0]]
    }

    fn h_sum<S: Real>(x: &[S]) -> Vec<S> {
        vec![x[0] + x[1] * x[1]]
    }

    #[test]
    fn projector_fixes_tangent_and_kills_orth() {
        let p = metric_field!(2, curved_metric);
        let h = smooth_map!(2, 1, h_sum);
        let x = [0.5, -0.7];
        let b = distributions(&p, &h, &x).unwrap();
        let pi = tangent_projector(&p, &h, &x).unwrap();
        let fixed = &pi * &b.tangent_basis - &b.tangent_basis;
        assert!(fixed.amax() < 1e-9);
        let killed = &pi * &b.orth_basis;
        assert!(killed.amax() < 1e-9);
        // Idempotence of the projector.
        assert!((&pi * &pi - pi).amax() < 1e-9);
    }
}
