//! Schur complement of a metric in output-adapted block coordinates.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// For a metric matrix written in `(y, z)` block order with `p` output
/// coordinates first, return the Schur complement
/// `P_y = P_yy - P_yz P_zz^{-1} P_zy`. When the output map is the
/// projection onto the first `p` coordinates this equals
/// `(dh P^{-1} dh^T)^{-1}`.
pub fn schur_py(pm: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>> {
    let n = pm.nrows();
    assert_eq!(pm.ncols(), n, "square matrix required");
    assert!(p <= n, "block size exceeds dimension");
    if p == n {
        return Ok(pm.clone());
    }
    let m = n - p;
    let pyy = pm.view((0, 0), (p, p)).into_owned();
    let pyz = pm.view((0, p), (p, m)).into_owned();
    let pzy = pm.view((p, 0), (m, p)).into_owned();
    let pzz = pm.view((p, p), (m, m)).into_owned();
    let pzz_inv = pzz.try_inverse().ok_or(Error::SingularBlock {
        what: "lower-right metric block".into(),
    })?;
    Ok(pyy - pyz * pzz_inv * pzy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_diagonal_returns_upper_block() {
        let pm = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.0, 0.0, 0.0, 3.0, 0.5, 0.0, 0.5, 1.0],
        );
        let s = schur_py(&pm, 1).unwrap();
        assert_eq!(s.nrows(), 1);
        assert!((s[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn matches_inverse_corner_identity() {
        // For SPD P in (y, z) order and h the projection on y, the Schur
        // complement equals the inverse of the y-corner of P^{-1}.
        let pm = DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, 1.0, 0.5, 0.2, //
                1.0, 3.0, 0.1, 0.4, //
                0.5, 0.1, 2.0, 0.3, //
                0.2, 0.4, 0.3, 5.0,
            ],
        );
        let p = 2;
        let s = schur_py(&pm, p).unwrap();
        let pinv = pm.clone().try_inverse().unwrap();
        let corner = pinv.view((0, 0), (p, p)).into_owned();
        let oracle = corner.try_inverse().unwrap();
        assert!((s - oracle).amax() < 1e-10);
    }

    #[test]
    fn singular_lower_block_is_reported() {
        let pm = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            schur_py(&pm, 1),
            Err(Error::SingularBlock { .. })
        ));
    }
}
