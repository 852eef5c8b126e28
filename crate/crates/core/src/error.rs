use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("divisor disc contains zero")]
    DivisorContainsZero,
    #[error("disc meets the branch cut of {0}")]
    BranchCutViolation(&'static str),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("evaluation at a disc containing zero of a polynomial with negative degrees")]
    PoleAtZero,
    #[error("negative degree in dividend")]
    NegativeDegreeInput,
    #[error("convergence rate {0} outside (0,1)")]
    AlphaOutOfRange(f64),
    #[error("pole lies on the integration path")]
    PoleOnPath,
    #[error("iterated integral is not integrable at an endpoint")]
    NonIntegrableEndpoint,
    #[error("divergent MZV index")]
    DivergentIndex,
    #[error("invalid index word {0:?}")]
    InvalidWord(Vec<u8>),
    #[error("no closed form stored for index {0}")]
    UnknownIndex(String),
    #[error("order {0} requested before lower orders were filled")]
    MissingLowerOrder(usize),
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("s = {s} is outside the radius T' = {tprime}")]
    SOutsideRadius { s: f64, tprime: f64 },
    #[error("points are equal or antipodal")]
    AntipodalOrEqual,
    #[error("degenerate triangle")]
    DegenerateTriangle,
    #[error("C_K = {0} is not below 1")]
    CKTooLarge(f64),
    #[error("no feasible parameter point found")]
    NoFeasiblePoint,
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
