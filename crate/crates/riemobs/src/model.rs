//! Plant description: an autonomous drift field together with an output map.

use crate::geometry::SmoothMap;

/// System `x' = f(x)`, `y = h(x)` with `x` in `R^n` and `y` in `R^p`.
#[derive(Clone)]
pub struct SystemModel {
    f: SmoothMap,
    h: SmoothMap,
}

impl SystemModel {
    pub fn new(f: SmoothMap, h: SmoothMap) -> Self {
        assert_eq!(f.n_in(), f.n_out(), "drift field must be square");
        assert_eq!(h.n_in(), f.n_in(), "output map domain mismatch");
        assert!(h.n_out() >= 1, "output map needs at least one component");
        assert!(
            h.n_out() <= h.n_in(),
            "output dimension cannot exceed state dimension"
        );
        Self { f, h }
    }

    /// State dimension `n`.
    pub fn state_dim(&self) -> usize {
        self.f.n_in()
    }

    /// Output dimension `p`.
    pub fn output_dim(&self) -> usize {
        self.h.n_out()
    }

    pub fn drift(&self) -> &SmoothMap {
        &self.f
    }

    pub fn output(&self) -> &SmoothMap {
        &self.h
    }
}
