use thiserror::Error;

pub type Result<T> = std::result::Result<T, BbsError>;

#[derive(Debug, Error)]
pub enum BbsError {
    #[error("invalid color {color}: expected a value in 0..={kappa}")]
    InvalidColor { color: u32, kappa: u32 },

    #[error("color {color} is not a positive color for kappa={kappa}")]
    NotPositiveColor { color: u32, kappa: u32 },

    #[error("kappa must be at least 1")]
    ZeroKappa,

    #[error("invalid color distribution: {0}")]
    InvalidDistribution(String),

    #[error("operation requires {required}, got {actual}")]
    Domain { required: &'static str, actual: String },

    #[error("instance too large for exhaustive search: {sites} sites (limit {limit})")]
    SizeLimit { sites: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
