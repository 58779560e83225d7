//! Scenario runner for the hybrid atom-field model: INI configs in, CSV out.

use std::fmt;
use std::path::Path;

pub mod config;
pub mod scenario;
pub mod table;
pub mod verify;

use config::{ConfigErrors, ScenarioKind};

#[derive(Debug)]
pub enum AppError {
    Config(ConfigErrors),
    Io(String),
    Numeric(String),
    Acceptance(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Io(_) => 2,
            Self::Numeric(_) => 3,
            Self::Acceptance(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "configuration error:\n{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Numeric(e) => write!(f, "numeric failure: {e}"),
            Self::Acceptance(e) => write!(f, "acceptance failure: {e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<ConfigErrors> for AppError {
    fn from(e: ConfigErrors) -> Self {
        Self::Config(e)
    }
}

/// Runs one scenario file. `output` overrides the config's `output` key;
/// with neither, the CSV goes to stdout.
pub fn run_file(config_path: &Path, output: Option<&Path>, threads: Option<usize>) -> Result<(), AppError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| AppError::Io(format!("{}: {e}", config_path.display())))?;
    let config = config::parse_config(&text)?;
    let table = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::Io(format!("thread pool: {e}")))?
            .install(|| scenario::run_scenario(&config))?,
        None => scenario::run_scenario(&config)?,
    };
    table::emit_csv(&table, output.or(config.output.as_deref()))?;
    if config.scenario == ScenarioKind::Verify {
        let failed: Vec<String> = table
            .numbers("passed")
            .unwrap_or_default()
            .iter()
            .zip(table.numbers("id").unwrap_or_default())
            .filter(|(p, _)| **p == 0.0)
            .map(|(_, id)| format!("{id}"))
            .collect();
        if !failed.is_empty() {
            return Err(AppError::Acceptance(format!("criteria {} failed", failed.join(", "))));
        }
    }
    Ok(())
}
