use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("carrier registry conflict: {0}")]
    CarrierConflict(String),

    #[error("reference measure does not dominate Lebesgue measure: density {density:e} at node ({x}, {y})")]
    NotDominating { density: f64, x: f64, y: f64 },

    #[error("decomposition ill-posed on carrier {carrier}: reference density vanishes where the measure does not")]
    IllPosedDecomposition { carrier: u32 },

    #[error("trace inconsistency of {gap:e} at ({x}, {y})")]
    TraceInconsistency { gap: f64, x: f64, y: f64 },

    #[error("invalid BV function: {0}")]
    InvalidFunction(String),

    #[error("function not in the approximation catalog: {0}")]
    NotInCatalog(String),

    #[error("point outside the open unit ball (|A| = {0})")]
    OutsideBall(f64),

    #[error("recession did not stabilize (diagnostic {diagnostic:e} > {tolerance:e})")]
    RecessionUnstable { diagnostic: f64, tolerance: f64 },

    #[error("numerical recession disagrees with analytic recession by {0:e}")]
    RecessionMismatch(f64),

    #[error("SQ parameters not found within radius budget for i = {0}")]
    SqParametersNotFound(f64),

    #[error("integrand precondition violated: {0}")]
    Integrand(String),

    #[error("no admissible sequence")]
    NoAdmissibleSequence,

    #[error("barycenter mismatch: {0:e}")]
    BarycenterMismatch(f64),

    #[error("invalid Young measure: {0}")]
    InvalidYoungMeasure(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
