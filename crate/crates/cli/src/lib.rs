//! Scenario runner for the giant-atom simulator: config parsing, scenario
//! execution and CSV/summary output.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

pub use config::{Config, ConfigError, Frame, Scenario};
pub use error::CliError;

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub frame: Option<String>,
    pub scenario: Option<String>,
}

/// Parse config text and apply overrides; nothing is written.
pub fn load_config(text: &str, overrides: &Overrides) -> Result<Config, ConfigError> {
    let mut cfg = Config::parse(text)?;
    if let Some(s) = &overrides.scenario {
        cfg.set("scenario", s)?;
    }
    if let Some(f) = &overrides.frame {
        cfg.set("frame", f)?;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Read, validate and run a config file; returns the paths written.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::ReadConfig { path: path.to_path_buf(), source })?;
    let cfg = load_config(&text, overrides)?;
    scenarios::run(&cfg)
}
