use thiserror::Error;

use crate::model::Codeword;

/// Every failure surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet needs at least two symbols with positive weight, got {0}")]
    DegenerateAlphabet(usize),
    #[error("invalid weight {weight} for symbol {symbol}")]
    InvalidWeight { symbol: u32, weight: f64 },
    #[error("duplicate symbol {0}")]
    DuplicateSymbol(u32),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("state {state}: codeword {first} is a prefix of {second}")]
    PrefixViolation {
        state: usize,
        first: Codeword,
        second: Codeword,
    },
    #[error("encoder entry (state {state}, symbol {symbol}) disagrees with the decoder tables")]
    InconsistentTables { state: usize, symbol: usize },
    #[error("encoder at state {state} has no entry for symbol {symbol}")]
    MissingSymbol { state: usize, symbol: usize },
    #[error("next state {next} out of range for a table with {n_states} states")]
    StateOutOfRange { next: usize, n_states: usize },
    #[error("codeword longer than {max} bits")]
    CodewordTooLong { max: usize },

    #[error("symbol at position {0} is not in the table alphabet")]
    UnknownSymbol(usize),
    #[error("initial state {state} out of range for {n_states} states")]
    InvalidInitialState { state: usize, n_states: usize },
    #[error("stream truncated")]
    TruncatedStream,
    #[error("state {state}: bit prefix {prefix} matches no codeword")]
    UnmatchedCodeword { state: usize, prefix: Codeword },
    #[error("trailing data after the declared symbol count")]
    TrailingGarbage,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("content hash mismatch")]
    HashMismatch,
    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("need at least {needed} states, got {got}")]
    TooFewStates { needed: usize, got: usize },
    #[error("state count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("N / N_s is not an integer for symbol index {symbol} (N = {n}, N_s = {count})")]
    NonIntegerRatio {
        symbol: usize,
        n: usize,
        count: usize,
    },
    #[error("construction needs {needed} states, budget is {cap}")]
    StateBudgetExceeded { needed: usize, cap: usize },
    #[error("a single symbol owns every state")]
    DegenerateSingleSymbol,
    #[error("invalid state counts: {0}")]
    InvalidCounts(String),

    #[error("encoding chain is not ergodic (irreducible: {irreducible}, period: {period})")]
    NotErgodic { irreducible: bool, period: usize },
    #[error("power iteration stopped at residual {0:e}")]
    NoConvergence(f64),
    #[error("bound does not apply to this table: {0}")]
    KindMismatch(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
