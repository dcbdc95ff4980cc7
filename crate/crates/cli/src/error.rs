use std::path::PathBuf;

use torsolv_core::Error as CoreError;

use crate::config::ConfigError;
use crate::field_io::FieldError;

/// Failures of a command. Verdicts are never errors.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("input field {0}")]
    Input(FieldError),
    #[error(
        "f is not in the closure of the range: compatibility fails at resonant xi {} (worst relative integral {worst:.3e})",
        list(.offenders)
    )]
    Closure { offenders: Vec<Vec<i64>>, worst: f64 },
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Core(CoreError),
}

fn list(xs: &[Vec<i64>]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ClosureViolation { offenders, worst_relative } => {
                CliError::Closure { offenders, worst: worst_relative }
            }
            CoreError::Compatibility { xi, relative } => CliError::Closure { offenders: vec![xi], worst: relative },
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn output(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Output { path: path.into(), message: e.to_string() }
    }

    /// 2: configuration, input or resolution problems; 3: closure
    /// violation; 4: no witnesses for a forge; 1: anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Closure { .. } => 3,
            CliError::Output { .. } | CliError::Pool(_) => 1,
            CliError::Core(e) => match e {
                CoreError::NoWitness { .. } | CoreError::NotResonant { .. } => 4,
                CoreError::Resolution { .. }
                | CoreError::InvalidSymbol(_)
                | CoreError::InvalidGrid { .. }
                | CoreError::InvalidBox { .. }
                | CoreError::MissingFrequency { .. }
                | CoreError::FrequencyTooSmall { .. }
                | CoreError::InvalidArgument(_)
                | CoreError::SequenceRepeats { .. }
                | CoreError::NodeOutOfRange { .. }
                | CoreError::TooFewFrequencies { .. } => 2,
                _ => 1,
            },
        }
    }
}
