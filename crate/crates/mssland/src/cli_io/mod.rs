// SPDX-License-Identifier: Apache-2.0

//! Configuration parsing and file output used by the command-line tool.

pub mod config;
pub mod output;

pub use config::{parse_config, parse_config_str, write_config, ConfigFile};
pub use output::{write_events_csv, write_stats_csv, write_trajectory_csv, OutputDir, RunManifest};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MSSLAND_OUT_DIR";

/// Output directory used when neither `--out` nor the environment variable is set.
pub const DEFAULT_OUT_DIR: &str = "out";
