use coach_core::{Arm, EngineError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("behavior arm {behavior} does not match condition arm {condition}")]
    ArmMismatch { behavior: Arm, condition: Arm },
    #[error("study is over (day {0})")]
    StudyOver(u8),
    #[error("proportional assignment needs n >= 10, got {0}")]
    BadN(usize),
    #[error("could not parse parameters: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
