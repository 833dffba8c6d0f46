use std::fmt;

use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: u8 = 0;
/// Exit status for invalid input: bad flags, config or problem data.
pub const EXIT_VALIDATION: u8 = 1;
/// Exit status for a computed quantity that missed its tolerance.
pub const EXIT_CONTRACT: u8 = 2;

/// A config problem, located by line and column or by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: Some(path.into()), line: None, column: None, message: message.into() }
    }

    /// Parse failure at a byte span of `text`.
    pub fn syntax(message: &str, span: Option<std::ops::Range<usize>>, text: &str) -> Self {
        let (line, column) = match span {
            Some(r) => {
                let before = &text[..r.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        Self { path: None, line, column, message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.path, self.line, self.column) {
            (Some(p), _, _) => write!(f, "config field `{p}`: {}", self.message),
            (None, Some(l), Some(c)) => write!(f, "config line {l}, column {c}: {}", self.message),
            _ => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Core(#[from] renorm_core::Error),

    #[error("{context}: {message}")]
    Io { context: String, message: String },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, err: impl fmt::Display) -> Self {
        CliError::Io { context: context.into(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_contract_violation() => EXIT_CONTRACT,
            _ => EXIT_VALIDATION,
        }
    }
}
