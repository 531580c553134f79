//! Central table of numeric defaults.
//!
//! Every tolerance and iteration cap used by the toolkit lives here so the
//! behaviour of the checkers is auditable in one place. CLI flags and config
//! files may override the values that are documented as configurable.

/// Relative step for central finite differences: `h_c = FD_STEP * (1 + |x_c|)`.
pub const FD_STEP: f64 = 1e-5;

/// Metric symmetry tolerance, relative to `max(1, ||P||_inf)`.
pub const METRIC_SYM_TOL: f64 = 1e-12;

/// Cholesky pivot tolerance for positive definiteness, scaled by `trace(P)/n`.
pub const SPD_PIVOT_TOL: f64 = 1e-12;

/// Agreement required between analytic jacobians and central differences
/// (relative, used by the self-check test suite).
pub const JACOBIAN_FD_TOL: f64 = 1e-5;

/// Agreement required between analytic metric derivatives and central
/// differences (relative, self-check suite).
pub const METRIC_DERIV_FD_TOL: f64 = 1e-5;

/// Symmetry tolerance for second-derivative matrices.
pub const HESSIAN_SYM_TOL: f64 = 1e-10;

/// Maximum relative drift of the conserved geodesic speed along one
/// integrated curve.
pub const GEODESIC_SPEED_TOL: f64 = 1e-6;

/// Maximum number of step halvings when enforcing the speed-drift bound.
pub const GEODESIC_MAX_HALVINGS: u32 = 8;

/// Initial number of integration steps for a unit parameter span.
pub const GEODESIC_BASE_STEPS: usize = 64;

/// Boundary-value solver: residual tolerance `|gamma(s_end) - x2| <=
/// BVP_TOL * (1 + |x2|)`.
pub const BVP_TOL: f64 = 1e-8;

/// Boundary-value solver: iteration cap for the damped Newton loop.
pub const BVP_MAX_ITERS: usize = 100;

/// Required agreement of the two one-sided boundary-value distances.
pub const DISTANCE_SYMMETRY_TOL: f64 = 1e-6;

/// Tangent-basis residual: `||dh * V||` per column.
pub const TANGENT_BASIS_TOL: f64 = 1e-10;

/// P-orthogonality residual between tangent and orthogonal bases.
pub const P_ORTHOGONALITY_TOL: f64 = 1e-9;

/// Projector reconstruction residual for the distribution bases.
pub const PROJECTOR_TOL: f64 = 1e-9;

/// Default decay-rate floor for the detectability verdict.
pub const Q_MIN_DEFAULT: f64 = 1e-6;

/// Scale factor for the tensor-nullity threshold:
/// `tol_i = NULLITY_TOL * (1 + ||d2h_i|| + ||Gamma|| * ||dh||)`.
pub const NULLITY_TOL: f64 = 1e-8;

/// Riemannian-submersion residual, relative to `||Q||`.
pub const SUBMERSION_TOL: f64 = 1e-8;

/// A gap derivative below `-MONOTONICITY_TOL` counts as a falsification.
pub const MONOTONICITY_TOL: f64 = 1e-8;

/// Metric-modification idempotence residual.
pub const PMOD_IDEMPOTENCE_TOL: f64 = 1e-10;

/// Schur-complement identity residual.
pub const SCHUR_TOL: f64 = 1e-10;

/// Observer with exact initial state must track to this accuracy.
pub const ZERO_ERROR_TOL: f64 = 1e-9;

/// Agreement between geodesic and closed-form distances on constant metrics.
pub const DISTANCE_AGREEMENT_TOL: f64 = 1e-6;

/// Multiplicative slack `(1 + CONTRACTION_SLACK)` in the discrete
/// contraction envelope.
pub const CONTRACTION_SLACK: f64 = 1e-3;

/// Minimum number of usable distance samples for a certificate.
pub const CERTIFICATE_MIN_SAMPLES: usize = 10;

/// Default sample count for region scans.
pub const DEFAULT_SAMPLES: usize = 512;

/// Default seed for deterministic sampling.
pub const DEFAULT_SEED: u64 = 0;

/// Gain scan ladder: powers of two from 1 to 1024.
pub const GAIN_SCAN_MAX_EXP: u32 = 10;

/// Significant digits for CSV number formatting.
pub const CSV_SIG_DIGITS: usize = 17;

/// Newton tolerance when inverting charts numerically.
pub const CHART_INVERSION_TOL: f64 = 1e-12;

/// Tolerance on the second-derivative identity of gap functions
/// (finite-difference check against twice the output metric).
pub const GAP_D2_TOL: f64 = 1e-6;

/// Rank-decision threshold for singular values, relative to the largest.
pub const RANK_TOL: f64 = 1e-9;
