use thiserror::Error;

/// Errors produced by the waveform, frontend, detector and analysis layers.
#[derive(Debug, Error)]
pub enum CpmError {
    /// A parameter violates its documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A symbol value is not a member of the scheme alphabet.
    #[error("symbol {symbol} is not in the {scheme} alphabet")]
    SymbolOutsideAlphabet { symbol: i8, scheme: &'static str },

    /// A symbol index refers past the end of a frame.
    #[error("symbol index {index} out of range for a frame of {n_symbols} symbols")]
    IndexOutOfRange { index: usize, n_symbols: usize },

    /// A brute-force operation was asked for more work than its cost bound
    /// allows. Refused explicitly rather than silently truncated.
    #[error("refusing brute-force enumeration: {what} = {requested} exceeds the limit of {max}")]
    TooLarge {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    /// A frame and a detector or bank disagree on scheme or sampling.
    #[error("frame/scheme mismatch: {0}")]
    Mismatch(String),

    /// A method/scheme/parameter combination outside the supported set.
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    /// An operation that requires input records received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl CpmError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CpmError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CpmError>;
