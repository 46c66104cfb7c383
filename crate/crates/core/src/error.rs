use thiserror::Error;

/// Every failure the engine can report. The CLI maps each variant to an exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("values are not dependent: {0}")]
    NotDependent(String),
    #[error("values are not independent: {0}")]
    NotIndependent(String),
    #[error("series is not a unit")]
    NotAUnit,
    #[error("field extension required: {}", field_need(*modulus, root))]
    FieldExtensionRequired { modulus: u64, root: String },
    #[error("truncation exhausted: {0}")]
    TruncationExhausted(String),
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("not representable: {0}")]
    NotRepresentable(String),
    #[error("rank deficient matrix")]
    RankDeficient,
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("invalid prepared form: {0}")]
    InvalidPreparedForm(String),
    #[error("invalid transformation: {0}")]
    InvalidTransformation(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("iteration limit: {0}")]
    IterationLimit(String),
    #[error("unsupported branch: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

fn field_need(modulus: u64, root: &str) -> String {
    match modulus {
        0 => format!("{root} lies outside the cyclotomic tower"),
        m => format!("need cyclotomic modulus {m} for {root}"),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
