use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// The CLI maps each variant onto a process exit code with [`LabError::exit_code`].
#[derive(Debug, Error)]
pub enum LabError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("singular configuration: {0}")]
    Singularity(String),
    #[error("anomaly pole: {0}")]
    Pole(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("fit impossible: {0}")]
    Fit(String),
    #[error("construction check failed: {0}")]
    Construction(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Contract(_)
            | LabError::Singularity(_)
            | LabError::Pole(_)
            | LabError::Config(_) => 1,
            LabError::Range(_)
            | LabError::Numerical(_)
            | LabError::Fit(_)
            | LabError::Construction(_)
            | LabError::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

macro_rules! contract {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::LabError::Contract(format!($($arg)+)));
        }
    };
}
pub(crate) use contract;
