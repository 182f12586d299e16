//! Error types.
//!
//! [`Failure`] is the randomized engine's "this update could not be completed
//! under the current random bits" signal; it is recoverable by reseeding and
//! replaying the update log. [`Error`] covers caller mistakes and wraps
//! failures that surfaced after the retry budget ran out.

use thiserror::Error;

/// A recoverable failure of a randomized update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Failure {
    /// Parsing needed a level above `2B`.
    #[error("parse level would exceed {max}")]
    LevelOverflow {
        /// The maximum admissible level (`2B`).
        max: u32,
    },
    /// The root level exceeded the depth guard `8(c ln t + ln n)`.
    #[error("depth {depth} exceeds guard {guard}")]
    DepthGuard {
        /// Level the parse reached.
        depth: u32,
        /// The guard value, rounded down.
        guard: u32,
    },
    /// A derived length does not fit a `B`-bit word.
    #[error("string length does not fit in the word size")]
    LengthOverflow,
}

/// Errors surfaced by the public API.
#[derive(Debug, Error)]
pub enum Error {
    /// A randomized failure (after retries, if restarts are enabled).
    #[error(transparent)]
    Failure(#[from] Failure),
    /// The handle was never issued.
    #[error("unknown handle H{0}")]
    UnknownHandle(u32),
    /// A position argument is outside the valid range.
    #[error("position {pos} out of range 1..={len}")]
    OutOfRange {
        /// Offending position.
        pos: u64,
        /// Length of the string it indexes.
        len: u64,
    },
    /// Strings in the collection are nonempty.
    #[error("empty string")]
    Empty,
    /// Malformed edit, key or argument.
    #[error("{0}")]
    Invalid(String),
}

/// Convenience alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
