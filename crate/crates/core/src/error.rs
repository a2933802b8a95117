use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query ({a}, {b}) leaves the realized window [{lo}, {hi}]")]
    OutOfWindow { a: f64, b: f64, lo: f64, hi: f64 },

    #[error("least-squares system is numerically singular (rank {rank} of {cols}); use ridge > 0")]
    SingularSystem { rank: usize, cols: usize },

    #[error("window too small: tail magnitude {tail:e} exceeds tolerance {tol:e}")]
    WindowTooSmall { tail: f64, tol: f64 },

    #[error("no substantial family for D = {0}")]
    NoFamily(f64),

    #[error("growth function is bounded (sup = {0}); the weight transform diverges")]
    BoundedGrowth(f64),

    #[error("function vanishes on a subinterval near x = {0}")]
    VanishesOnInterval(f64),

    #[error("growth claim violated at z = {re} + {im}i: log|F| = {log_abs} > {bound}")]
    GrowthViolation {
        re: f64,
        im: f64,
        log_abs: f64,
        bound: f64,
    },

    #[error("stage {stage} failed: {reason}")]
    StageFailure { stage: usize, reason: String },

    #[error("profile invariant breached: {0}")]
    ProfileInvariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
