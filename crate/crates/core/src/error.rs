use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value:#x} does not fit in {count} bits")]
    ValueOutOfRange { value: u64, count: u32 },

    #[error("bit field of {0} bits exceeds the 64-bit limit")]
    FieldTooWide(u32),

    #[error("unexpected end of stream")]
    EndOfStream,

    #[error("zero burst overruns the declared element count")]
    DecodeOverrun,

    #[error("corrupt block: {0}")]
    CorruptBlock(&'static str),

    #[error("payload declares {declared} bits but only {consumed} were consumed")]
    TrailingBits { consumed: u64, declared: u64 },

    #[error("decoded {decoded} elements, container declares {declared}")]
    CountMismatch { decoded: u64, declared: u64 },

    #[error("expected {expected} words, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("{method} stream did not reproduce its input")]
    RoundTripMismatch { method: crate::container::Method },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("bad format: {0}")]
    BadFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error comes from malformed caller-supplied parameters
    /// rather than from data or I/O.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParams(_))
    }
}
