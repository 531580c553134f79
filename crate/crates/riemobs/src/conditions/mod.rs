//! Sampled verification of the observer design conditions: differential
//! detectability, geodesic monotonicity (tensor nullity, block form and
//! direct falsification) and the submersion property. Verdicts are
//! sample-based, never global certificates.

pub mod a2;
pub mod a3;
pub mod distributions;
pub mod region;
pub mod report;

pub use a2::{a2_rate_at, check_a2, rho_certificate};
pub use a3::{
    check_a3_nullity, check_geodesic_monotonicity_direct, check_submersion,
    sff_blocks, MonotonicityOptions, SffBlocks,
};
pub use distributions::{distributions, tangent_projector, DistributionBasis};
pub use region::Region;
pub use report::{ConditionReport, Verdict, Witness};
