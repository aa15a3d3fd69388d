//! Screening: plate batteries, response sessions and classification.

mod battery;
mod classify;
mod respondent;
mod session;

use thiserror::Error;

pub use battery::{create_battery, Battery, Composition};
pub use classify::{classify, ClassKind, Classification, PlateOutcome, RED_GREEN_ERRORS, TRITAN_ERRORS};
pub use respondent::simulated_respondent;
pub use session::{start_session, validate_answer, Response, SessionState, TestSession};

use crate::plates::PlateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Plate(#[from] PlateError),
    #[error("invalid composition: {0}")]
    Composition(String),
    #[error("session is {0:?}")]
    State(SessionState),
    #[error("expected a response to plate {expected}, got {got}")]
    Sequencing { expected: String, got: String },
    #[error("answer {0:?} must contain only digits")]
    MalformedAnswer(String),
    #[error("no response for plate {0}")]
    MissingResponse(String),
    #[error("more than one response for plate {0}")]
    DuplicateResponse(String),
    #[error("plate {0} is not part of the battery")]
    UnknownPlate(String),
}
