use std::fmt;

/// Position of a parse error inside a text input (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{value} is not representable in {format}")]
    NotRepresentable { value: String, format: String },
    #[error("malformed bit word: {0}")]
    MalformedWord(String),
    #[error("invalid arithmetic format: {0}")]
    InvalidFormat(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("network is not quantised to {0}")]
    UnquantisedNetwork(String),
    #[error("input {index} is not representable in {format}")]
    UnrepresentableInput { index: usize, format: String },
    #[error("syntax error at {location}: {message}")]
    Syntax { location: Location, message: String },
    #[error("assignment is missing variable {0}")]
    MissingVariable(String),
    #[error("width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("constant {constant} does not fit in {width} bits")]
    ConstantTooWide { constant: String, width: usize },
    #[error("search space of 2^{bits} assignments exceeds the cap of 2^{cap}")]
    SearchSpaceTooLarge { bits: usize, cap: usize },
    #[error("empty clause on line {0}")]
    EmptyClause(usize),
    #[error("clause on line {line} has {len} literals, at most 3 are allowed")]
    ClauseTooWide { line: usize, len: usize },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("exploration budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("rounding mode {0} is not supported by this construction")]
    UnsupportedRounding(String),
    #[error("overflow mode {0} is not supported by this construction")]
    UnsupportedOverflow(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("exponent width {width} exceeds the cap {cap}")]
    ExponentWidthTooLarge { width: u32, cap: u32 },
    #[error("network depth {depth} exceeds the supported depth {max}")]
    UnsupportedDepth { depth: usize, max: usize },
    #[error("activation pattern search exceeded {0} explored nodes")]
    PatternSpaceTooLarge(u64),
    #[error("input space of {size} points exceeds the cap {cap}")]
    InputSpaceTooLarge { size: String, cap: u64 },
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            location: Location { line, column },
            message: message.into(),
        }
    }

    /// True for verdict-level resource exhaustion (caps and budgets), as opposed
    /// to malformed input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::SearchSpaceTooLarge { .. }
                | Error::BudgetExhausted(_)
                | Error::PatternSpaceTooLarge(_)
                | Error::InputSpaceTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
