//! Error type shared across the library.
//!
//! Recoverable failures (bad files, invalid samples, empty datasets)
//! are reported through [`Error`]. Shape violations inside the numeric
//! kernels are programmer errors and panic instead; callers are
//! expected to validate inputs at the boundary first.

use std::fmt;
use std::io;

#[derive(Debug)]
pub enum Error {
    /// A sample carries zero perspectives.
    EmptyPerspectives,
    /// A sample carries zero instances.
    EmptySequence,
    /// Perspective sequences disagree on their instance count.
    RaggedLengths {
        perspective: usize,
        expected: usize,
        got: usize,
    },
    /// An instance vector disagrees with the declared feature dim.
    FeatureDimMismatch {
        perspective: usize,
        instance: usize,
        expected: usize,
        got: usize,
    },
    /// Sample perspective count disagrees with the network config.
    PerspectiveCountMismatch { expected: usize, got: usize },
    /// A configuration value is out of its legal range.
    InvalidConfig(String),
    /// Training or evaluation was handed an empty dataset.
    EmptyDataset,
    /// A stored label is not a valid class index.
    LabelOutOfRange { label: u32, num_classes: u32 },
    /// A file did not start with the expected magic bytes.
    BadMagic { expected: [u8; 4], got: [u8; 4] },
    /// A file carries an unsupported format version.
    BadVersion { expected: u32, got: u32 },
    /// A file ended before the header-declared payload.
    Truncated { expected: u64, got: u64 },
    /// Header counts are zero or multiply past addressable range.
    BadCounts(String),
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyPerspectives => write!(f, "sample has no perspectives (m = 0)"),
            Error::EmptySequence => write!(f, "sample has no instances (n = 0)"),
            Error::RaggedLengths {
                perspective,
                expected,
                got,
            } => write!(
                f,
                "perspective {perspective} has {got} instances, expected {expected}"
            ),
            Error::FeatureDimMismatch {
                perspective,
                instance,
                expected,
                got,
            } => write!(
                f,
                "perspective {perspective}, instance {instance}: feature dim {got}, expected {expected}"
            ),
            Error::PerspectiveCountMismatch { expected, got } => {
                write!(f, "sample has {got} perspectives, network expects {expected}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::LabelOutOfRange { label, num_classes } => {
                write!(f, "label {label} out of range for {num_classes} classes")
            }
            Error::BadMagic { expected, got } => write!(
                f,
                "not a {} file (magic bytes {:02x?})",
                String::from_utf8_lossy(expected),
                got
            ),
            Error::BadVersion { expected, got } => {
                write!(f, "unsupported format version {got}, expected {expected}")
            }
            Error::Truncated { expected, got } => {
                if got < expected {
                    write!(f, "file truncated: expected {expected} bytes, found {got}")
                } else {
                    write!(f, "file has trailing data: expected {expected} bytes, found {got}")
                }
            }
            Error::BadCounts(msg) => write!(f, "bad header counts: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
