//! IO, configuration and experiment orchestration on top of `hmp-core`.
//!
//! - [`formats`]: skeleton JSON, motion CSV and regressor CSV.
//! - [`config`]: experiment config and model JSON documents.
//! - [`report`]: results CSV and the SVG bar chart.
//! - [`runner`]: corpus loading, sweeps and run manifests.

pub mod config;
pub mod formats;
pub mod report;
pub mod runner;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("expected {expected} joints ({} columns), found {columns} columns", 3 * expected)]
    JointCountMismatch { expected: usize, columns: usize },
    #[error("non-finite value at frame {frame}, joint {joint}")]
    NonFiniteValue { frame: usize, joint: usize },
    #[error("cannot parse '{text}' in data row {frame}")]
    BadNumber { frame: usize, text: String },
    #[error("motion has no frames")]
    EmptySequence,
    #[error("{0} may not contain ',', '=' or line breaks")]
    InvalidMeta(&'static str),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] hmp_core::Error),
}
