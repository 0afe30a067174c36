use std::io;

use thiserror::Error;

pub type Result<T, E = CmsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CmsError {
    #[error("input contains no FASTA records")]
    EmptyInput,

    #[error("sequence data before the first '>' header (line {line})")]
    MissingHeader { line: usize },

    #[error("record {record:?} has an empty sequence")]
    EmptySequence { record: String },

    #[error("record {record:?} contains non-printable byte 0x{byte:02x}")]
    NonPrintable { record: String, byte: u8 },

    #[error("record {record:?} contains reserved byte {:?}", *byte as char)]
    ReservedByte { record: String, byte: u8 },

    #[error("reference is empty")]
    EmptyReference,

    #[error("collection has no documents")]
    EmptyCollection,

    #[error("index {index} out of range for array of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bucket {bucket}: heads and head-counters account for {used} suffixes but the bucket holds {total}")]
    CounterMismatch {
        bucket: usize,
        used: u64,
        total: u64,
    },

    #[error("run {index} has zero length")]
    ZeroLengthRun { index: usize },

    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },

    #[error("oracle refused instance of size {size} (limit {limit})")]
    OracleLimit { size: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}
