//! File formats and run configuration: delimited-text counts/events files,
//! the labeled POVM document, diagnostics and results documents, plot-data
//! files and the TOML run configuration with presets.
//!
//! All numeric serialization is fixed decimal (counts as integers, other
//! reals with 6 decimals) so outputs are byte-deterministic under fixed
//! seeds and usable as golden files.

mod config;
mod counts;
mod events;
mod povm_doc;
mod report;

pub use config::{parse_config, parse_config_str, AcquisitionConfig, OutputConfig, Preset, RunConfig, SecuritySection};
pub use counts::{read_counts_file, read_z_records, write_counts_file, write_z_records, COUNTS_HEADER, Z_HEADER};
pub use events::{read_events_file, write_events_file, EVENTS_HEADER};
pub use povm_doc::{povm_from_document, povm_to_document, read_povm_document, write_povm_document, POVM_READ_TOLERANCE};
pub use report::{
    config_fingerprint, diagnostics_to_document, ellipse_plot_document, fidelity_table,
    results_to_document, security_plot_document, write_ellipse_plot, write_results,
    write_security_plot, FidelityRow, ReportDocument,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    /// Configuration schema or invariant violation, with the offending key.
    #[error("config error: {0}")]
    Config(String),
    /// Malformed data file content.
    #[error("data error in {path}: {message}")]
    Data { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IoError {
    pub(crate) fn data(path: &std::path::Path, message: impl Into<String>) -> Self {
        IoError::Data { path: path.display().to_string(), message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.display().to_string(), source }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub(crate) fn write_string(path: &std::path::Path, content: &str) -> Result<(), IoError> {
    std::fs::write(path, content).map_err(|e| IoError::io(path, e))
}

/// Write a text document (diagnostics, reports) to a file.
pub fn write_text(path: &std::path::Path, content: &str) -> Result<(), IoError> {
    write_string(path, content)
}
