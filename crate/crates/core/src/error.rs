use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PtwError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("binding annihilates the denominator")]
    PoleHit,
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("essential singularity")]
    EssentialSingularity,
    #[error("zero input")]
    ZeroInput,
    #[error("non-real root of unity requested in the symbolic regime")]
    SymbolicRootOfUnity,
    #[error("operation requires the numeric regime")]
    SymbolicRegime,
    #[error("ramified data cannot be handled symbolically")]
    SymbolicRamified,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("tail series does not converge: {0}")]
    NonSummableTail(String),
    #[error("pole pattern does not match any germ shape: {0}")]
    UnrecognizedPoleStructure(String),
    #[error("no closed form and oracle disabled")]
    OracleRequired,
    #[error("input outside the Hecke-generated family")]
    OutsideHeckeFamily,
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("integrand not locally constant at mesh level {0}")]
    NotLocallyConstant(u32),
    #[error("regime mismatch")]
    RegimeMismatch,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PtwError>;
