use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Diagnostics for the instance file format. Each malformation gets its own variant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing `p eksr <n> <m> <k>` header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("header appears more than once")]
    DuplicateHeader,
    #[error("bad literal `{0}`")]
    BadLiteral(String),
    #[error("clause line not terminated by 0")]
    MissingTerminator,
    #[error("clause has {found} literals, expected {expected}")]
    WrongLiteralCount { expected: usize, found: usize },
    #[error("variable {0} appears more than once in a clause")]
    DuplicateVariable(usize),
    #[error("variable {var} out of range 1..={n}")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("found {found} clause lines, header declares {expected}")]
    ClauseCount { expected: usize, found: usize },
    #[error("missing `{0}` assignment line")]
    MissingAssignment(char),
    #[error("bitstring has length {found}, expected {expected}")]
    BitstringLength { expected: usize, found: usize },
    #[error("bitstring contains a character other than 0/1: `{0}`")]
    BadBitstring(String),
    #[error("unexpected line: `{0}`")]
    UnexpectedLine(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseError },
    #[error("{which} assignment does not satisfy the formula")]
    EndpointNotSatisfying { which: &'static str },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("steps {step} and {} differ in {distance} variables", step + 1)]
    AdjacencyViolation { step: usize, distance: usize },
    #[error("reconfiguration sequence is empty")]
    EmptySequence,
    #[error("{what}: {actual} exceeds cap {limit}")]
    CapExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },
    #[error("clause width {found} does not match expected width {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("formula is not uniform width")]
    MixedWidth,
    #[error("no pairwise variable-disjoint clause tuple exists")]
    NoDisjointTuple,
    #[error("assignment does not satisfy the source formula")]
    NotSatisfying,
    #[error("emitted formula would be empty")]
    EmptyFormula,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(line: usize, kind: ParseError) -> Self {
        Error::Parse { line, kind }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
