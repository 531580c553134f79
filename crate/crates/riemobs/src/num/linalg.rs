//! Dense `f64` helpers on top of nalgebra: tolerant Cholesky, generalized
//! symmetric eigenproblems, null spaces and principal angles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol::{RANK_TOL, SPD_PIVOT_TOL};

/// Cholesky factor `L` (lower) with an explicit pivot floor of
/// `SPD_PIVOT_TOL * trace / n`. Errors with the offending pivot when the
/// matrix is not positive definite at that scale.
pub fn spd_cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let tol = SPD_PIVOT_TOL * m.trace().abs().max(f64::MIN_POSITIVE) / n as f64;
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            return Err(Error::SingularMetric { pivot: d, tol });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solve `L z = b` for lower-triangular `L`.
pub fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut z = DVector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Solve `L^T z = b` for lower-triangular `L`.
pub fn solve_lower_t(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut z = DVector::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Largest eigenvalue and eigenvector of the pencil `(A, B)` with `A`
/// symmetric and `B` symmetric positive definite: `A v = lambda B v`.
pub fn gen_eig_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::InsufficientSamples { have: 0, need: 1 });
    }
    let l = spd_cholesky(b)?;
    // C = L^{-1} A L^{-T}, symmetric.
    let mut c = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = a.column(j).into_owned();
        let z = solve_lower(&l, &col);
        c.set_column(j, &z);
    }
    let mut c2 = DMatrix::zeros(n, n);
    for i in 0..n {
        let row = c.row(i).transpose().into_owned();
        let z = solve_lower(&l, &row);
        c2.set_row(i, &z.transpose());
    }
    // Symmetrize against roundoff before the eigensolve.
    let c2 = (&c2 + c2.transpose()) * 0.5;
    let eig = c2.symmetric_eigen();
    let mut best = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let u = eig.eigenvectors.column(best).into_owned();
    let v = solve_lower_t(&l, &u);
    Ok((eig.eigenvalues[best], v))
}

/// Orthonormal basis of the null space of `m` (columns), using the SVD with
/// a relative singular-value threshold. `expected_rank` is checked.
///
/// The matrix is padded with zero rows up to square so the decomposition
/// always exposes the full right singular basis.
pub fn null_space(m: &DMatrix<f64>, expected_rank: usize) -> Result<DMatrix<f64>> {
    let n = m.ncols();
    let mut padded = DMatrix::zeros(m.nrows().max(n), n);
    padded.rows_mut(0, m.nrows()).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd with v_t requested");
    // Order is not guaranteed; sort the right singular vectors ourselves.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = RANK_TOL * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    if rank != expected_rank {
        return Err(Error::RankDeficientOutput {
            rank,
            expected: expected_rank,
        });
    }
    let null_dim = n - rank;
    let mut basis = DMatrix::zeros(n, null_dim);
    for k in 0..null_dim {
        basis.set_column(k, &vt.row(order[rank + k]).transpose());
    }
    Ok(basis)
}

/// Numerical rank with a relative threshold.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = RANK_TOL * smax.max(1.0);
    svd.singular_values.iter().filter(|s| **s > tol).count()
}

/// Principal angles (radians) between the column spans of `u` and `v`.
pub fn principal_angles(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Vec<f64> {
    let qu = orthonormalize(u);
    let qv = orthonormalize(v);
    let m = qu.transpose() * qv;
    let svd = m.svd(false, false);
    svd.singular_values
        .iter()
        .map(|s| s.min(1.0).max(-1.0).acos())
        .collect()
}

/// Thin QR-based orthonormal basis for the column span.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let q = qr.q();
    q.columns(0, m.ncols().min(q.ncols())).into_owned()
}

/// Frobenius norm of a matrix.
pub fn fro(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest and smallest eigenvalues of a symmetric matrix.
pub fn sym_eig_extrema(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in eig.eigenvalues.iter() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (hi, lo)
}
