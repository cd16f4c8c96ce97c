use thiserror::Error;

use crate::mseries::Exponent;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("malformed rational `{0}` (expected p/q)")]
    Rational(String),
    #[error("series json: {message} (line {line}, column {column})")]
    Json {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("invalid series document: {0}")]
    Document(String),
    #[error("expression: {message} at offset {offset}")]
    Expr { message: String, offset: usize },
    #[error("couple `{0}`: expected `alpha=[a1,...,ad] k=p/q`")]
    Couple(String),
    #[error("monomial map word: {0}")]
    Word(String),
    #[error("config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("series is not a unit (zero constant term)")]
    NotAUnit,
    #[error("exponent {0} is not divisible by the monomial")]
    NotDivisible(Exponent),
    #[error("replacement for axis {0} has a nonzero constant term")]
    UncertifiedSubstitution(usize),
    #[error("germ must vanish at the origin")]
    NonzeroConstant,
    #[error("germ is zero up to degree {0}")]
    ZeroGerm(u32),
    #[error("exponent has length {got}, expected {expected}")]
    ExponentLength { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("couple needs a nonzero exponent and k > 0")]
    InvalidCouple,
    #[error("couples {0} and {1} are equivalent; no strict order exists")]
    EquivalentCouples(usize, usize),
    #[error("empty couple list")]
    Empty,
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("certified order {available} too low to decide (need at least {needed})")]
    InsufficientOrder { available: i64, needed: i64 },
    #[error("blow-up charts need dimension >= 2")]
    DimensionTooSmall,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("linear form weights must be positive")]
    NonPositiveWeight,
    #[error("linear form ties {0} and {1}; perturb the weights")]
    LinearFormTie(Exponent, Exponent),
    #[error("n_max = {n_max} exhausts the cap (certified cap would be {certified})")]
    CapExhausted { n_max: usize, certified: i64 },
    #[error("decomposition has {have} components, need at least {need}")]
    InsufficientComponents { have: usize, need: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("underdetermined fit: {points} points for {params} parameters")]
    Underdetermined { points: usize, params: usize },
    #[error("alpha entries must be positive")]
    NonPositiveAlpha,
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("dimension must be {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BorelError {
    #[error("k must be positive")]
    NonPositiveK,
    #[error("point {point} lies outside the sector of opening pi/k around theta")]
    SectorViolation { point: String },
    #[error("non-finite evaluation of the Borel transform at {0}")]
    NonFinite(String),
    #[error("terms increase from the start; |t| too large for optimal truncation")]
    DivergentAtStart,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("singular linear system")]
    Singular,
    #[error("invalid arc or size: {0}")]
    InvalidArc(String),
    #[error("unknown closed form `{0}`")]
    UnknownClosedForm(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("cap {cap} too small, need at least {needed}")]
    CapTooSmall { cap: u32, needed: u32 },
    #[error("A_j vanishes identically: Q = (1 + cQ)P, no new equation")]
    Degenerate,
    #[error("exact division failed: {0}")]
    Divisibility(String),
    #[error("C_j from the P side and from the Q side differ")]
    InconsistentC,
    #[error("germ must be an exact polynomial")]
    NotExact,
}
