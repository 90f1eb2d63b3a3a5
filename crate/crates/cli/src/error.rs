use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] modclock::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 2 for anything traceable to the configuration, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use modclock::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidParameter { .. } | E::Scenario(_) | E::Incommensurate(_) | E::Size { .. },
            ) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}
