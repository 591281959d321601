use std::path::PathBuf;

use serde_json::json;
use tenun_core::Error;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(Error::Capacity { .. }) => EXIT_CAPACITY,
            CliError::Core(_) | CliError::Usage(_) => EXIT_VALIDATION,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "code": match self {
                CliError::Io { .. } => "io",
                CliError::Core(e) => e.code(),
                CliError::Usage(_) => "usage",
            },
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Io { path, .. } => body["file"] = json!(path),
            CliError::Core(Error::Schema { path, .. }) => body["path"] = json!(path),
            CliError::Core(Error::Capacity { required, capacity }) => {
                body["required_shafts"] = json!(required);
                body["capacity"] = json!(capacity);
            }
            _ => {}
        }
        json!({ "error": body })
    }
}
