// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the segmentation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value violates the structural invariants of its type
    /// (e.g. signal pieces that overlap or leave a gap).
    #[error("invalid structure: {0}")]
    Structure(String),
    /// An argument is out of range or inconsistent with another argument.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// The request must be served by a different solver or evaluator.
    #[error("wrong route: {0}")]
    Routing(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
