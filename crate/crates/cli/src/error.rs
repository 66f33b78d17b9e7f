use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("geometry error: {0}")]
    Geometry(#[from] jetfield_core::GeomError),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Exit status: every error here is a configuration or usage problem.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
