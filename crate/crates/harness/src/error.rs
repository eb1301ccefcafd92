use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Core(#[from] jchaos_core::Error),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Other(e.into())
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        use jchaos_core::Error as E;
        match self {
            HarnessError::Validation(_) => 2,
            HarnessError::Dependency(_) => 3,
            HarnessError::Resource(_) => 4,
            HarnessError::Core(e) => match e {
                E::Input(_) | E::Range { .. } | E::Parse { .. } | E::Unsupported(_) => 2,
                E::Resource { .. } => 4,
                E::UndefinedCorrelation(_) | E::FitFailure(_) => 1,
            },
            HarnessError::Other(_) => 1,
        }
    }
}

impl From<&HarnessError> for ExitCode {
    fn from(e: &HarnessError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type HResult<T> = std::result::Result<T, HarnessError>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> HResult<T> {
    Err(HarnessError::Validation(msg.into()))
}
