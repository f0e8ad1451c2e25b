use std::path::PathBuf;

use nsit_core::NsitError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error{}: {message}", position(*.line, *.column))]
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
    #[error("invalid config: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{task}: {source}")]
    Compute {
        task: String,
        #[source]
        source: NsitError,
    },
    #[error("{task}: {message}")]
    Check { task: String, message: String },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn position(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}

impl CliError {
    pub fn compute(task: &str, source: NsitError) -> Self {
        CliError::Compute {
            task: task.to_string(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Compute { .. } | CliError::Check { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// One-line machine-readable form for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Compute { .. } => "computation",
            CliError::Check { .. } => "check",
            CliError::Io { .. } => "io",
        };
        let mut v = json!({ "error": kind, "exit_code": self.exit_code(), "message": self.to_string() });
        match self {
            CliError::Parse { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Validation(errs) => v["violations"] = json!(errs),
            CliError::Compute { task, .. } | CliError::Check { task, .. } => v["task"] = json!(task),
            CliError::Io { path, .. } => v["path"] = json!(path.display().to_string()),
        }
        v
    }
}
