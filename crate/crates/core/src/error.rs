use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {context}")]
    NonFinite { context: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside generator horizon [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("ordered exponential did not converge: defect {defect:.3e} after {steps} steps")]
    OracleNotConverged { defect: f64, steps: usize },

    #[error("sample at {at} is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { at: String, asymmetry: f64 },

    #[error(
        "Hermitian part is not positive semidefinite at {at} (min eigenvalue {min_eigenvalue:.3e}); \
         use the ill-posed variant for indefinite Hermitian parts"
    )]
    NotPsd { at: String, min_eigenvalue: f64 },

    #[error("|lambda_min| * t = {product:.3} exceeds the admissible limit {limit}")]
    HorizonExceeded { product: f64, limit: f64 },

    #[error("quadrature did not converge with {nodes} nodes")]
    QuadratureNotConverged { nodes: usize },

    #[error("series grid did not converge: change {change:.3e} at N = {grid}")]
    GridNotConverged { change: f64, grid: u64 },

    #[error("trace drift {drift:.3e} exceeds {limit:.1e}")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ApsError>;
