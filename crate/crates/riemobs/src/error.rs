use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library-wide error type. Variants carry enough context to report the
/// failing quantity without keeping a reference to the inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive definite at the evaluation point (pivot {pivot:.3e} below tolerance {tol:.3e})")]
    SingularMetric { pivot: f64, tol: f64 },

    #[error("metric matrix is not symmetric: asymmetry {asym:.3e} exceeds {tol:.3e}")]
    AsymmetricMetric { asym: f64, tol: f64 },

    #[error("output jacobian is rank deficient: rank {rank} < {expected}")]
    RankDeficientOutput { rank: usize, expected: usize },

    #[error("chart jacobian is singular and cannot be inverted")]
    SingularJacobian,

    #[error("solver did not converge: residual {residual:.3e} after {iters} iterations")]
    NoConvergence { residual: f64, iters: usize },

    #[error("trajectory left the region of interest at t = {at:.6}")]
    LeftRegion { at: f64 },

    #[error("integration step failed: {reason}")]
    StepFailure { reason: String },

    #[error("matrix block is singular: {what}")]
    SingularBlock { what: String },

    #[error("rank condition violated: rank {rank} < {expected} at point {point:?}")]
    RankViolation {
        rank: usize,
        expected: usize,
        point: Vec<f64>,
    },

    #[error("weight function must stay positive on the region (value {value:.3e} at {point:?})")]
    NonpositiveWeight { value: f64, point: Vec<f64> },

    #[error("parameter search found no feasible point: {detail}")]
    NoFeasiblePoint { detail: String },

    #[error("output metric is not supported here: {detail}")]
    UnsupportedQ { detail: String },

    #[error("not enough usable samples: have {have}, need {need}")]
    InsufficientSamples { have: usize, need: usize },

    #[error("missing artifacts: {detail}")]
    MissingArtifacts { detail: String },

    #[error("dimension mismatch: expected {expected}, got {got} for {what}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
