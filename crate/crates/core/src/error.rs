//! Shared error type for the numerical core.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Shapes or extents do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A configuration value is outside its valid range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A NaN or infinity showed up where finite values are required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Training produced a non-finite loss; the iteration index and the
    /// loss history up to that point are preserved for diagnostics.
    #[error("numerical abort at iteration {iteration}: loss became non-finite")]
    NumericalAbort {
        iteration: usize,
        loss_history: Vec<f64>,
    },

    /// Tensor file does not start with the expected magic bytes.
    #[error("bad magic: expected \"DRMT\", found {found:02x?}")]
    BadMagic { found: [u8; 4] },

    /// Tensor file declares a format version this build cannot read.
    #[error("unsupported tensor format version {0}")]
    UnsupportedVersion(u16),

    /// Tensor file declares an unknown element type.
    #[error("unsupported tensor dtype tag {0}")]
    UnsupportedDtype(u8),

    /// Tensor file ends before the payload implied by its header.
    #[error("truncated tensor file: expected {expected} payload bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
