use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("cone coverage violated at site {site:?}")]
    ConeCoverage { site: Vec<i64> },
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("coalescence unresolved at site {site:?} with t_max={t_max}")]
    Unresolved { site: Vec<i64>, t_max: u64 },
    #[error("priority tie between sites {a:?} and {b:?} (noise-source defect)")]
    PriorityTie { a: Vec<i64>, b: Vec<i64> },
    #[error("influence audit violation: {0}")]
    AuditViolation(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("sample data invalid at line {line}: {msg}")]
    Data { line: usize, msg: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
