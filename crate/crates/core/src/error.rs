use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("interface leaves the admissible band: |f| reaches {max_abs:.6} > {limit:.6}")]
    InterfaceOutOfRange { max_abs: f64, limit: f64 },

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("Picard iteration did not contract after {iterations} iterations (difference ratios {ratios:?})")]
    NoContraction { iterations: usize, ratios: Vec<f64> },

    #[error("right-hand side must be mean-zero, got mean {0:.3e}")]
    NotMeanZero(f64),

    #[error("compatibility condition {condition} violated (residual {residual:.3e})")]
    Compatibility { condition: &'static str, residual: f64 },

    #[error("stability condition violated: Lambda = {lambda:.6} < required {required:.6}")]
    Unstable { lambda: f64, required: f64 },

    #[error("initial data violates {condition} (residual {residual:.3e})")]
    InitialData { condition: &'static str, residual: f64 },

    #[error("monitor breach: {name} = {value:.6e} exceeds limit {limit:.6e}")]
    MonitorBreach { name: String, value: f64, limit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
