use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("max over an empty list")]
    EmptyMax,
    #[error("equation has an all-inert side (-inf = finite)")]
    DegenerateEquation,
    #[error("constraint violated: B1+B2+A3+A4 = Q+A1+A2+B3+B4 ({lhs} != {rhs})")]
    Constraint { lhs: String, rhs: String },
    #[error("sign constraint violated: sa1*sa2*sa3*sa4 must equal sb1*sb2*sb3*sb4")]
    SignConstraint,
    #[error("Riccati conditions violated: {0}")]
    RiccatiConditions(String),
    #[error("invalid window: {0}")]
    Window(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown family: {0}")]
    UnknownFamily(String),
    #[error("family {family}: {reason}")]
    FamilyArgs { family: String, reason: String },
    #[error("linear ansatz identity violated: {0}")]
    AnsatzIdentity(String),
    #[error("table too short: need {need} points, have {have}")]
    TableTooShort { need: usize, have: usize },
    #[error("pole at m={m}: {what} vanishes")]
    Pole { m: i64, what: String },
    #[error("division by zero in log-domain arithmetic")]
    DivByZero,
    #[error("no continuation at m={0}")]
    NoContinuation(i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
