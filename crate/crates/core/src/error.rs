// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the tuning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The transmon approximation is not valid for these energies.
    #[error("outside transmon regime: E_J/E_C = {ratio:.3} < {min:.1}")]
    Regime { ratio: f64, min: f64 },

    /// Malformed input record.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Input parsed but violates a data-model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    /// The die does not match the QPU layout.
    #[error("layout error: {0}")]
    Layout(String),

    #[error("planning error: {0}")]
    Planning(String),

    #[error("fit error: {0}")]
    Fit(String),

    /// A plan could not be applied to a wafer.
    #[error("application error: {0}")]
    Apply(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Planning(_) => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
