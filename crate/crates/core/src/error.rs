use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every domain failure the crate can report.
///
/// [`Error::code`] gives the stable SCREAMING_SNAKE name used by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not 0 or a prime")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("exponent {l} is not coprime to the characteristic {p}")]
    BadModulus { p: u64, l: u64 },
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("element is not an {0}-th power")]
    NotAPower(u64),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("coefficient out of range: {0}")]
    CoefficientOutOfRange(String),
    #[error("series is missing its O(t^P) precision term")]
    MissingPrecision,
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u64, u64),
    #[error("series is zero to its precision")]
    ZeroToPrecision,
    #[error("coefficient {h} requested but precision is {prec}")]
    PrecisionExceeded { h: i64, prec: i64 },
    #[error("series is not a p^{0}-th power")]
    NotAPthPower(u32),
    #[error("operation needs positive characteristic")]
    CharZero,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("substituted series must have valuation >= 1")]
    NotInMaximalIdeal,
    #[error("series is not a uniformiser: {0}")]
    NotUniformiser(String),
    #[error("series must lie in the valuation ring")]
    NotInValuationRing,
    #[error("series is a p-th power at its precision")]
    IsPthPower,
    #[error("series is constant at its precision")]
    ConstantSeries,
    #[error("target is outside the ball of radius index {radius}")]
    OutsideBall { radius: i64 },
    #[error("search space of {0} candidates exceeds the cap")]
    SearchSpaceTooLarge(u128),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("formula is not decidable by this evaluator: {0}")]
    NotEvaluable(String),
    #[error("formula is not well formed: {0}")]
    IllFormed(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NOT_PRIME",
            Error::ZeroInverse => "ZERO_INVERSE",
            Error::BadModulus { .. } => "BAD_MODULUS",
            Error::ZeroInput => "ZERO_INPUT",
            Error::NotAPower(_) => "NOT_A_POWER",
            Error::Syntax { .. } => "SYNTAX_ERROR",
            Error::CoefficientOutOfRange(_) => "COEFFICIENT_OUT_OF_RANGE",
            Error::MissingPrecision => "MISSING_PRECISION",
            Error::CharacteristicMismatch(..) => "CHARACTERISTIC_MISMATCH",
            Error::ZeroToPrecision => "ZERO_TO_PRECISION",
            Error::PrecisionExceeded { .. } => "PRECISION_EXCEEDED",
            Error::NotAPthPower(_) => "NOT_A_PTH_POWER",
            Error::CharZero => "CHAR_ZERO",
            Error::InsufficientPrecision(_) => "INSUFFICIENT_PRECISION",
            Error::NotInMaximalIdeal => "NOT_IN_MAXIMAL_IDEAL",
            Error::NotUniformiser(_) => "NOT_UNIFORMISER",
            Error::NotInValuationRing => "NOT_IN_VALUATION_RING",
            Error::IsPthPower => "IS_PTH_POWER",
            Error::ConstantSeries => "CONSTANT_SERIES",
            Error::OutsideBall { .. } => "OUTSIDE_BALL",
            Error::SearchSpaceTooLarge(_) => "SEARCH_SPACE_TOO_LARGE",
            Error::BadParams(_) => "BAD_PARAMS",
            Error::NotEvaluable(_) => "NOT_EVALUABLE",
            Error::IllFormed(_) => "ILL_FORMED",
        }
    }

    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos,
            msg: msg.into(),
        }
    }
}
