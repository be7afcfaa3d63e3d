use std::fmt;

/// Exit status classes of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Runtime,
    Usage,
}

impl ExitKind {
    pub fn status(self) -> i32 {
        match self {
            ExitKind::Runtime => 1,
            ExitKind::Usage => 2,
        }
    }
}

/// A failure reported as `error: <code>: <message>` on one line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub code: String,
    pub message: String,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { kind: ExitKind::Usage, code: "usage".into(), message: message.into() }
    }

    pub fn runtime(code: &str, message: impl Into<String>) -> Self {
        CliError { kind: ExitKind::Runtime, code: code.into(), message: message.into() }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::runtime("io", format!("{}: {err}", path.display()))
    }

    /// The single output line, with any embedded newlines flattened.
    pub fn line(&self) -> String {
        let flat: Vec<&str> = self.message.split_whitespace().collect();
        format!("error: {}: {}", self.code, flat.join(" "))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CliError {}

impl From<qdiff_core::Error> for CliError {
    fn from(e: qdiff_core::Error) -> Self {
        CliError::runtime(e.code(), e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::runtime("io", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::runtime("io", e.to_string())
    }
}
