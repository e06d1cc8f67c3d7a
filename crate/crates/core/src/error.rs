use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {message}")]
    Numeric {
        message: String,
        diagnostics: Vec<(String, f64)>,
    },
    #[error("precondition violated: {message}")]
    Precondition {
        message: String,
        offending: Vec<String>,
    },
    #[error("diagnostic error: {0}")]
    Diagnostic(String),
}

impl Error {
    pub fn numeric(message: &str, diagnostics: &[(&str, f64)]) -> Self {
        Error::Numeric {
            message: message.to_string(),
            diagnostics: diagnostics
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }

    pub fn precondition(message: impl Into<String>, offending: Vec<String>) -> Self {
        Error::Precondition {
            message: message.into(),
            offending,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
