use thiserror::Error;

pub type Result<T, E = PgmError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PgmError {
    #[error("table too large: {entries} entries exceeds cap of {cap}")]
    TableTooLarge { entries: u128, cap: usize },

    #[error("scope violation: variable {0} is not in the table scope")]
    ScopeViolation(usize),

    #[error("inconsistent calibration: positive value divided by zero")]
    InconsistentCalibration,

    #[error("zero mass: table has no positive entries")]
    ZeroMass,

    #[error("impossible evidence")]
    ImpossibleEvidence,

    #[error("invalid variable: {0}")]
    InvalidVariable(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown format '{0}' (expected one of: bif, dot, json)")]
    UnknownFormat(String),

    #[error("variable mismatch: {0}")]
    VariableMismatch(String),

    #[error("no consistent DAG extension exists")]
    NoExtension,

    #[error("all samples rejected (rejection rate {rejection_rate})")]
    AllSamplesRejected { rejection_rate: f64 },

    #[error("zero total weight")]
    ZeroTotalWeight,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unnormalized distribution: sum {0}")]
    Unnormalized(f64),

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<PgmError>,
    },
}

impl PgmError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        PgmError::Parse { line, msg: msg.into() }
    }
}
