use thiserror::Error;

use crate::config::{Mode, Scheme};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frame length mismatch: expected {expected} samples, got {got}")]
    FrameLength { expected: usize, got: usize },

    #[error("bit block length mismatch: expected {expected} bits, got {got}")]
    BitLength { expected: usize, got: usize },

    #[error("symbol length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("chirp rate must be nonzero")]
    ZeroRate,

    #[error("value {value} does not fit in {width} bits")]
    ValueOutOfRange { value: u64, width: usize },

    #[error("rank {rank} out of range for C({n}, {k})")]
    RankOutOfRange { rank: u64, n: usize, k: usize },

    #[error("{scheme} does not support {mode} detection")]
    UnsupportedMode { scheme: Scheme, mode: Mode },

    #[error("target BER {target:e} is not bracketed by the scan (BER at {lo_db} dB is {ber_lo:e})")]
    Unbracketed { target: f64, lo_db: f64, ber_lo: f64 },

    #[error("invalid scan: {0}")]
    InvalidScan(String),

    #[error("{path}: line {line}: field `{field}`: {msg}")]
    Parse {
        path: String,
        line: usize,
        field: String,
        msg: String,
    },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
