use loewner_core::driving::DrivingError;
use loewner_core::flow::FlowError;
use loewner_core::io::IoError;
use loewner_core::recursion::RecursionError;
use loewner_core::threshold::ThresholdError;
use loewner_core::trace::TraceError;
use loewner_core::welding::WeldingError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<DrivingError> for CliError {
    fn from(e: DrivingError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidInitial(_) | FlowError::InvalidConfig(_) => CliError::Invalid(e.to_string()),
            FlowError::StepLimitExceeded { .. } | FlowError::NonFiniteState { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Flow(f) => f.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<WeldingError> for CliError {
    fn from(e: WeldingError) -> Self {
        match e {
            WeldingError::Flow(f) => f.into(),
            WeldingError::NoHitWithinBudget { .. } | WeldingError::BracketFailure { .. } => {
                CliError::Numerical(e.to_string())
            }
            WeldingError::NormTooLarge { .. } | WeldingError::InvalidArgument(_) => {
                CliError::Invalid(e.to_string())
            }
        }
    }
}

impl From<ThresholdError> for CliError {
    fn from(e: ThresholdError) -> Self {
        match e {
            ThresholdError::Flow { source, c } => match CliError::from(source) {
                CliError::Numerical(m) => CliError::Numerical(format!("c = {c}: {m}")),
                CliError::Invalid(m) => CliError::Invalid(format!("c = {c}: {m}")),
            },
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<RecursionError> for CliError {
    fn from(e: RecursionError) -> Self {
        match e {
            RecursionError::OutOfRange(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}
