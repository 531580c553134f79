//! Dense row-major matrices over any [`Real`] scalar. Dimensions here are
//! tiny (state dimension at most a handful), so plain loops with partial
//! pivoting are both adequate and easy to audit. Used to assemble metric
//! expressions that must stay differentiable through dual scalars.

use super::real::Real;

#[derive(Clone, Debug)]
pub struct GMat<S: Real> {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<S>,
}

impl<S: Real> GMat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            a: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, a: Vec<S>) -> Self {
        assert_eq!(a.len(), rows * cols, "flat data length mismatch");
        Self { rows, cols, a }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.a[i * self.cols + j] = v;
    }

    pub fn t(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                for j in 0..o.cols {
                    let v = out.get(i, j) + aik * o.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn scale(&self, c: S) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * c)
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..self.cols {
                    acc = acc + self.get(i, j) * x[j];
                }
                acc
            })
            .collect()
    }

    /// Gauss-Jordan inverse with partial pivoting on the underlying values.
    /// Returns `None` when a pivot collapses numerically.
    pub fn inv(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse needs a square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = m.get(col, col).val().abs();
            for r in col + 1..n {
                let cand = m.get(r, col).val().abs();
                if cand > best {
                    best = cand;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    let tmp = m.get(col, j);
                    m.set(col, j, m.get(piv, j));
                    m.set(piv, j, tmp);
                    let tmp = inv.get(col, j);
                    inv.set(col, j, inv.get(piv, j));
                    inv.set(piv, j, tmp);
                }
            }
            let d = m.get(col, col);
            for j in 0..n {
                m.set(col, j, m.get(col, j) / d);
                inv.set(col, j, inv.get(col, j) / d);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m.get(r, col);
                for j in 0..n {
                    let v = m.get(r, j) - factor * m.get(col, j);
                    m.set(r, j, v);
                    let v = inv.get(r, j) - factor * inv.get(col, j);
                    inv.set(r, j, v);
                }
            }
        }
        Some(inv)
    }

    /// Map every entry's value through `f`, dropping derivative parts.
    pub fn values(&self) -> GMat<f64> {
        GMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).val())
    }

    /// Row-major entries.
    pub fn data(&self) -> &[S] {
        &self.a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::real::{seed_d1, D1};

    #[test]
    fn inverse_of_known_matrix() {
        let m = GMat::from_vec(2, 2, vec![4.0, 7.0, 2.0, 6.0]);
        let inv = m.inv().unwrap();
        let expect = [0.6, -0.7, -0.2, 0.4];
        for (got, want) in inv.a.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_propagates_derivatives() {
        // d/dt (1/(2+t)) at t=0 must be -1/4 in the (0,0) entry of the
        // inverse of diag(2+t, 5).
        let x = [0.0_f64];
        let s = seed_d1(&x, 0);
        let m = GMat::from_vec(
            2,
            2,
            vec![
                D1::lift(2.0) + s[0],
                D1::lift(0.0),
                D1::lift(0.0),
                D1::lift(5.0),
            ],
        );
        let inv = m.inv().unwrap();
        assert!((inv.get(0, 0).re - 0.5).abs() < 1e-14);
        assert!((inv.get(0, 0).du + 0.25).abs() < 1e-14);
        assert!((inv.get(1, 1).re - 0.2).abs() < 1e-14);
        assert!(inv.get(1, 1).du.abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = GMat::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(m.inv().is_none());
    }
}
