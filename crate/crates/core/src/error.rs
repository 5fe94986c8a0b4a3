//! Crate-wide error type.

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid gate parameters: {0}")]
    InvalidGateParams(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("loss must be a scalar, got shape {0:?}")]
    LossNotScalar(Vec<usize>),

    #[error("backward already ran on this tape; record a fresh tape first")]
    TapeConsumed,

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("truncated file while reading {0}")]
    Truncated(String),

    #[error("item count mismatch: {0}")]
    CountMismatch(String),

    #[error("architecture mismatch: {0}")]
    ArchMismatch(String),

    #[error("invalid merge spec: {0}")]
    InvalidMergeSpec(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("enumeration cap exceeded: {combos} assignments > cap {cap}")]
    CapExceeded { combos: u128, cap: u64 },

    #[error("non-finite loss ({value}) at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        value: f64,
    },

    #[error("empty dataset")]
    EmptyData,

    #[error(transparent)]
    Io(#[from] io::Error),
}
