use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] infometric::Error),

    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),

    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for usage, configuration and domain errors; 2 when a numerical
    /// check could not be completed.
    pub fn exit_code(&self) -> u8 {
        use infometric::Error as E;
        match self {
            CliError::Core(
                E::NonConvergence { .. }
                | E::NonFiniteIntegrand { .. }
                | E::Divergent { .. }
                | E::DerivativeInstability { .. }
                | E::ExtrapolationUnstable { .. }
                | E::StepRejected { .. },
            ) => 2,
            _ => 1,
        }
    }
}
