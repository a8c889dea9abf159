//! Error reporting and exit codes.

use std::fmt;

use capkaya_core::{Error, ErrorClass};

#[derive(Debug)]
pub struct Failure {
    pub class: ErrorClass,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Config, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Data, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self { class: ErrorClass::Io, message: format!("{}: {e}", path.display()) }
    }

    /// 2 config, 3 data validation, 4 numeric failure, 5 I/O.
    pub fn code(&self) -> i32 {
        match self.class {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
            ErrorClass::Io => 5,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { class: e.class(), message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.class {
            ErrorClass::Config => "config error",
            ErrorClass::Data => "data error",
            ErrorClass::Numeric => "numeric error",
            ErrorClass::Io => "i/o error",
        };
        write!(f, "{label}: {}", self.message)
    }
}
