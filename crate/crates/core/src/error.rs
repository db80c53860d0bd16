use alloc::string::String;

use crate::rules::Phase;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("map parse error: {0}")]
    Parse(String),
    #[error("invalid map: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("invalid game configuration: {0}")]
    Config(String),
    #[error("operation requires phase {expected:?}, game is in {actual:?}")]
    Phase { expected: Phase, actual: Phase },
    #[error("game is already over")]
    GameOver,
    #[error("illegal action: {0}")]
    IllegalAction(String),
    #[error("contract violation: {0}")]
    Contract(String),
}
