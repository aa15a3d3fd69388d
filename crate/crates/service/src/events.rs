//! Append-only JSON-lines event log.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chromascreen::engine::Classification;
use serde::{Deserialize, Serialize};

use crate::adaptation::SessionAdaptation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        seed: u64,
        created_ms: u64,
    },
    Response {
        session_id: String,
        plate_id: String,
        answer: String,
    },
    Classified {
        session_id: String,
        classification: Classification,
    },
    Adapted {
        session_id: String,
        adaptation: SessionAdaptation,
    },
}

impl Event {
    pub fn session_id(&self) -> &str {
        match self {
            Event::SessionCreated { session_id, .. }
            | Event::Response { session_id, .. }
            | Event::Classified { session_id, .. }
            | Event::Adapted { session_id, .. } => session_id,
        }
    }
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(EventLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one event as a single line and flushes it to the OS.
    pub fn append(&mut self, event: &Event) -> io::Result<()> {
        let mut line = serde_json::to_vec(event).map_err(io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()
    }
}

/// Reads every event of a log. A missing file is an empty log; any line that
/// does not parse is reported with its 1-based number.
pub fn read_events(path: &Path) -> Result<Vec<(usize, Event)>, ReadError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(ReadError::Io(e)),
    };
    let mut events = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(ReadError::Io)?;
        let event = serde_json::from_str(&line).map_err(|e| ReadError::Parse {
            line: index + 1,
            message: e.to_string(),
        })?;
        events.push((index + 1, event));
    }
    Ok(events)
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        assert!(read_events(&path).unwrap().is_empty());
        let mut log = EventLog::open(&path).unwrap();
        let created = Event::SessionCreated {
            session_id: "ab".into(),
            seed: u64::MAX,
            created_ms: 5,
        };
        let response = Event::Response {
            session_id: "ab".into(),
            plate_id: "p".into(),
            answer: "12".into(),
        };
        log.append(&created).unwrap();
        log.append(&response).unwrap();
        let read = read_events(&path).unwrap();
        assert_eq!(read, vec![(1, created), (2, response)]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(r#"{"event":"session_created","#));

        std::fs::write(&path, format!("{text}not json\n")).unwrap();
        match read_events(&path) {
            Err(ReadError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
