use std::path::PathBuf;

use cesaro_core::Error as CoreError;

/// A config field that failed validation.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
}

impl ConfigError {
    pub(crate) fn field(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Field { field, reason: reason.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    /// Sequence file violation; `row` is the 1-based file line.
    #[error("{path}: {}{}{reason}", row.map(|r| format!("line {r}: ")).unwrap_or_default(), column.as_ref().map(|c| format!("column `{c}`: ")).unwrap_or_default())]
    Schema { path: PathBuf, row: Option<usize>, column: Option<String>, reason: String },
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: CoreError },
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(CoreError) -> Self {
        move |source| CliError::Stage { stage, source }
    }

    /// Process exit status: 2 for configuration problems, 3 when the
    /// Dunford-Pettis precondition fails, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { source: CoreError::DiagnosticsFailed { .. }, .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
