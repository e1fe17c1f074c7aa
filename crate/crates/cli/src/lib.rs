//! Library side of the `semiview` command-line tool: configuration parsing,
//! dataset loading, grid execution with resume support, and reporting.

pub mod config;
pub mod dataset;
pub mod report;
pub mod runner;
pub mod solve;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing file: {0}")]
    MissingFile(String),

    #[error("shape mismatch in {file}: {detail}")]
    ShapeMismatch { file: String, detail: String },

    #[error("parse error in {file} at row {row}, column {col}: {detail}")]
    ParseError {
        file: String,
        row: usize,
        col: usize,
        detail: String,
    },

    #[error("missing results file: {0}")]
    MissingResults(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] semiview::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config syntax: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("records syntax: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Formats a float with 15 significant digits, the precision every numeric
/// output file uses.
pub fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}
