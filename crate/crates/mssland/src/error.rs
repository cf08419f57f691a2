// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value violates an invariant. `key` is the dotted key path.
    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// An input lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The scenario cannot be flown with the given thrust limits.
    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    /// Mass fell to or below the dry-mass floor.
    #[error("fuel depleted at t = {t:.3} s (mass {mass:.3} kg, floor {floor:.3} kg)")]
    FuelDepleted { t: f64, mass: f64, floor: f64 },

    /// The state became non-finite during propagation.
    #[error("non-finite state at t = {t:.3} s")]
    NonFinite { t: f64 },

    /// A statistic is undefined for the given data.
    #[error("undefined statistic: {0}")]
    Undefined(String),

    /// Filesystem or serialization failure tied to a path.
    #[error("i/o error on {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            reason: err.to_string(),
        }
    }
}
