//! Error taxonomy shared by the whole crate.
//!
//! Three failure classes matter to callers: invalid mathematical input
//! (`Domain`), an exhaustive search or precision budget that would be
//! exceeded (`Capacity`), and malformed external data (`Format`, always
//! carrying a line number). I/O errors pass through unchanged.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity guard: {0}")]
    Capacity(String),

    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
