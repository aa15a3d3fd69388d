use serde::{Deserialize, Serialize};

use super::{Battery, EngineError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub plate_id: String,
    /// Digits read, in order; empty when nothing was seen.
    pub answer: String,
}

impl Response {
    pub fn new(plate_id: impl Into<String>, answer: impl Into<String>) -> Self {
        Response {
            plate_id: plate_id.into(),
            answer: answer.into(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        validate_answer(&self.answer)
    }
}

pub fn validate_answer(answer: &str) -> Result<(), EngineError> {
    if answer.chars().all(|c| c.is_ascii_digit()) {
        Ok(())
    } else {
        Err(EngineError::MalformedAnswer(answer.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    InProgress,
    Complete,
    Aborted,
}

/// Response collection for one pass through a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSession {
    pub id: String,
    pub battery_id: String,
    plate_ids: Vec<String>,
    cursor: usize,
    responses: Vec<Response>,
    state: SessionState,
}

pub fn start_session(id: impl Into<String>, battery: &Battery) -> TestSession {
    TestSession {
        id: id.into(),
        battery_id: battery.id.clone(),
        plate_ids: battery.plate_ids(),
        cursor: 0,
        responses: Vec::new(),
        state: SessionState::InProgress,
    }
}

impl TestSession {
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn responses(&self) -> &[Response] {
        &self.responses
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn plate_count(&self) -> usize {
        self.plate_ids.len()
    }

    /// Id of the plate awaiting an answer.
    pub fn current_plate_id(&self) -> Option<&str> {
        match self.state {
            SessionState::InProgress => self.plate_ids.get(self.cursor).map(String::as_str),
            _ => None,
        }
    }

    /// Records `response` for the current plate. On error the session is left
    /// untouched.
    pub fn submit_response(&mut self, response: Response) -> Result<SessionState, EngineError> {
        if self.state != SessionState::InProgress {
            return Err(EngineError::State(self.state));
        }
        let expected = &self.plate_ids[self.cursor];
        if &response.plate_id != expected {
            return Err(EngineError::Sequencing {
                expected: expected.clone(),
                got: response.plate_id,
            });
        }
        response.validate()?;
        self.responses.push(response);
        self.cursor += 1;
        if self.cursor == self.plate_ids.len() {
            self.state = SessionState::Complete;
        }
        Ok(self.state)
    }

    pub fn abort(&mut self) -> Result<(), EngineError> {
        if self.state != SessionState::InProgress {
            return Err(EngineError::State(self.state));
        }
        self.state = SessionState::Aborted;
        Ok(())
    }
}
