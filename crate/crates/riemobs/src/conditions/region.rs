//! Sampling regions: an axis-aligned bounding box with an optional
//! membership predicate carving out a subset, plus a deterministic
//! low-discrepancy sampler.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::StatePoint;
use crate::num::halton::Halton;

pub type MemberFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Region of state space from which check samples are drawn. Sampling uses
/// a Halton sequence over the bounding box with rejection by the membership
/// predicate, so a given seed always yields the same point list.
#[derive(Clone)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
    member: Option<MemberFn>,
}

impl Region {
    /// Plain axis-aligned box.
    pub fn rect(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(
            lo.iter().zip(&hi).all(|(a, b)| a < b),
            "box bounds must be ordered"
        );
        Self {
            lo,
            hi,
            member: None,
        }
    }

    /// Box restricted by a membership predicate.
    pub fn with_membership(lo: Vec<f64>, hi: Vec<f64>, member: MemberFn) -> Self {
        let mut r = Self::rect(lo, hi);
        r.member = Some(member);
        r
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.lo.len() {
            return false;
        }
        let in_box = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| v >= a && v <= b);
        in_box && self.member.as_ref().is_none_or(|m| m(x))
    }

    /// Deterministic sample of `count` points inside the region. Fails when
    /// the predicate rejects too much of the box.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<StatePoint>> {
        let mut gen = Halton::new(self.dim(), seed);
        let mut out = Vec::with_capacity(count);
        let budget = 1000 * count.max(16);
        for _ in 0..budget {
            if out.len() == count {
                break;
            }
            let u = gen.next_point();
            let x: Vec<f64> = u
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(t, (a, b))| a + t * (b - a))
                .collect();
            if self.contains(&x) {
                out.push(StatePoint(x));
            }
        }
        if out.len() < count {
            return Err(Error::NoFeasiblePoint {
                detail: format!(
                    "membership predicate accepted {}/{count} within the sampling budget",
                    out.len()
                ),
            });
        }
        Ok(out)
    }

    /// Deterministic sample of `count` point pairs (for two-endpoint
    /// checks); the two streams use decorrelated seeds.
    pub fn sample_pairs(
        &self,
        seed: u64,
        count: usize,
    ) -> Result<Vec<(StatePoint, StatePoint)>> {
        let a = self.sample(seed, count)?;
        let b = self.sample(seed.wrapping_add(0x5bd1e995), count)?;
        Ok(a.into_iter().zip(b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_sampling_is_deterministic_and_inside() {
        let r = Region::rect(vec![-1.0, 2.0], vec![1.0, 3.0]);
        let s1 = r.sample(7, 64).unwrap();
        let s2 = r.sample(7, 64).unwrap();
        assert_eq!(s1, s2);
        for p in &s1 {
            assert!(r.contains(&p.0));
        }
        let s3 = r.sample(8, 64).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn membership_predicate_filters() {
        let r = Region::with_membership(
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            Arc::new(|x: &[f64]| x[0] * x[0] + x[1] * x[1] < 1.0),
        );
        let s = r.sample(0, 200).unwrap();
        assert_eq!(s.len(), 200);
        for p in &s {
            assert!(p.0[0] * p.0[0] + p.0[1] * p.0[1] < 1.0);
        }
    }

    #[test]
    fn infeasible_membership_reports() {
        let r = Region::with_membership(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            Arc::new(|_: &[f64]| false),
        );
        assert!(matches!(
            r.sample(0, 4),
            Err(Error::NoFeasiblePoint { .. })
        ));
    }
}
