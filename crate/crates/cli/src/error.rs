use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step {step} failed: {source}")]
    Numerical {
        step: usize,
        #[source]
        source: etdrk_core::Error,
    },

    #[error(transparent)]
    Core(#[from] etdrk_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit status: 2 for configuration and I/O problems, 3 for
    /// failures of the numerics.
    pub fn exit_code(&self) -> i32 {
        use etdrk_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Core(e) => match e {
                E::MeshMismatch { .. } | E::InvalidMesh(_) | E::InvalidParameter(_) | E::Io { .. } | E::Parse { .. } => 2,
                _ => 3,
            },
        }
    }
}
