use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown player index {0}")]
    UnknownPlayer(usize),

    #[error("unknown player `{0}`")]
    UnknownPlayerLabel(String),

    #[error("action index {index} out of range for player {player}")]
    ActionOutOfRange { player: usize, index: usize },

    #[error("unknown action `{action}` for player `{player}`")]
    UnknownAction { player: String, action: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("kernel row for player {player}, action {action} is not stochastic: {reason}")]
    NotStochastic {
        player: usize,
        action: usize,
        reason: String,
    },

    #[error("division by zero")]
    DivisionByZero,

    #[error("malformed rational `{0}`")]
    MalformedRational(String),

    #[error("malformed linear system: {0}")]
    MalformedSystem(String),

    #[error("invalid infeasibility certificate")]
    InvalidCertificate,

    #[error("solver and direct check disagree: {0}")]
    Disagreement(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}
