//! In-memory sessions backed by the event log. Every mutation is appended to
//! the log before it becomes visible, and replay drives the same transitions.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{SystemTime, UNIX_EPOCH};

use chromascreen::engine::{
    classify, create_battery, start_session, validate_answer, Battery, Classification, EngineError, Response,
    SessionState, TestSession,
};
use chromascreen::plates::{render_svg, IshiharaPlate};
use chromascreen::rng::derive_seed;
use rand::Rng;
use serde::Serialize;

use crate::adaptation::{Catalog, SessionAdaptation};
use crate::events::{read_events, Event, EventLog, ReadError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// Every session gets the same battery; session ids are derived from the seed.
    Fixed(u64),
    PerSession,
}

const BATTERY_CACHE: usize = 16;

/// Batteries are pure functions of their seed, so recently used ones are shared.
pub fn battery_for_seed(seed: u64) -> Result<Arc<Battery>, EngineError> {
    type Cache = Mutex<Vec<(u64, Arc<Battery>)>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().iter().find(|(s, _)| *s == seed) {
        return Ok(hit.1.clone());
    }
    let battery = Arc::new(create_battery(seed, None)?);
    let mut entries = cache.lock().unwrap();
    if !entries.iter().any(|(s, _)| *s == seed) {
        if entries.len() == BATTERY_CACHE {
            entries.remove(0);
        }
        entries.push((seed, battery.clone()));
    }
    Ok(battery)
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no session {0}")]
    UnknownSession(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("session is {0:?}, results need a complete session")]
    NotComplete(SessionState),
    #[error("event log: {0}")]
    Log(#[from] io::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum OpenError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: line {line}: {message}")]
    Replay { path: String, line: usize, message: String },
}

#[derive(Debug, Clone)]
struct SessionRecord {
    seed: u64,
    created_ms: u64,
    battery: Arc<Battery>,
    session: TestSession,
    classification: Option<Classification>,
    adaptation: Option<SessionAdaptation>,
}

/// Comparable view of a session, used to check replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSnapshot {
    pub seed: u64,
    pub created_ms: u64,
    pub session: TestSession,
    pub classification: Option<Classification>,
    pub adaptation: Option<SessionAdaptation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlateView {
    pub plate_id: String,
    pub index: usize,
    pub total: usize,
    pub svg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Progress {
    Next(String),
    Done,
}

pub struct Store {
    sessions: HashMap<String, SessionRecord>,
    log: EventLog,
    catalog: Catalog,
    seed_mode: SeedMode,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Store {
    /// Replays the log at `path` (created if missing) and keeps appending to it.
    pub fn open(path: &Path, catalog: Catalog, seed_mode: SeedMode) -> Result<Self, OpenError> {
        let display = path.display().to_string();
        let events = read_events(path).map_err(|e| match e {
            ReadError::Io(source) => OpenError::Io {
                path: display.clone(),
                source,
            },
            ReadError::Parse { line, message } => OpenError::Replay {
                path: display.clone(),
                line,
                message,
            },
        })?;
        let log = EventLog::open(path).map_err(|source| OpenError::Io {
            path: display.clone(),
            source,
        })?;
        let mut store = Store {
            sessions: HashMap::new(),
            log,
            catalog,
            seed_mode,
        };
        for (line, event) in events {
            store.apply(event).map_err(|message| OpenError::Replay {
                path: display.clone(),
                line,
                message,
            })?;
        }
        // a crash between the last response and its classification
        let pending: Vec<String> = store
            .sessions
            .iter()
            .filter(|(_, r)| r.session.state() == SessionState::Complete && r.classification.is_none())
            .map(|(id, _)| id.clone())
            .collect();
        for id in pending {
            store.classify_session(&id).map_err(|e| OpenError::Io {
                path: display.clone(),
                source: io::Error::other(e.to_string()),
            })?;
        }
        Ok(store)
    }

    fn apply(&mut self, event: Event) -> Result<(), String> {
        match event {
            Event::SessionCreated {
                session_id,
                seed,
                created_ms,
            } => {
                if self.sessions.contains_key(&session_id) {
                    return Err(format!("session {session_id} created twice"));
                }
                let battery = battery_for_seed(seed).map_err(|e| e.to_string())?;
                self.insert(session_id, seed, created_ms, battery);
            }
            Event::Response {
                session_id,
                plate_id,
                answer,
            } => {
                let record = self.record_mut(&session_id)?;
                record
                    .session
                    .submit_response(Response::new(plate_id, answer))
                    .map_err(|e| e.to_string())?;
            }
            Event::Classified {
                session_id,
                classification,
            } => {
                let record = self.record_mut(&session_id)?;
                if record.session.state() != SessionState::Complete || record.classification.is_some() {
                    return Err(format!("unexpected classification for session {session_id}"));
                }
                let recomputed =
                    classify(&record.battery, record.session.responses()).map_err(|e| e.to_string())?;
                if recomputed != classification {
                    return Err(format!("classification of session {session_id} does not match its responses"));
                }
                record.classification = Some(classification);
            }
            Event::Adapted {
                session_id,
                adaptation,
            } => {
                let record = self.record_mut(&session_id)?;
                if record.classification.is_none() || record.adaptation.is_some() {
                    return Err(format!("unexpected adaptation for session {session_id}"));
                }
                record.adaptation = Some(adaptation);
            }
        }
        Ok(())
    }

    fn record_mut(&mut self, id: &str) -> Result<&mut SessionRecord, String> {
        self.sessions.get_mut(id).ok_or_else(|| format!("unknown session {id}"))
    }

    fn record(&self, id: &str) -> Result<&SessionRecord, StoreError> {
        self.sessions.get(id).ok_or_else(|| StoreError::UnknownSession(id.to_string()))
    }

    fn insert(&mut self, id: String, seed: u64, created_ms: u64, battery: Arc<Battery>) {
        let session = start_session(id.clone(), &battery);
        self.sessions.insert(
            id,
            SessionRecord {
                seed,
                created_ms,
                battery,
                session,
                classification: None,
                adaptation: None,
            },
        );
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn log_path(&self) -> &Path {
        self.log.path()
    }

    /// Seed for the next session's battery.
    pub fn next_seed(&self) -> u64 {
        match self.seed_mode {
            SeedMode::Fixed(seed) => seed,
            SeedMode::PerSession => rand::rng().random(),
        }
    }

    fn new_session_id(&self) -> String {
        let mut n = self.sessions.len() as u64;
        loop {
            let id = match self.seed_mode {
                SeedMode::Fixed(seed) => {
                    let base = derive_seed(seed, n);
                    format!("{:016x}{:016x}", derive_seed(base, 0), derive_seed(base, 1))
                }
                SeedMode::PerSession => format!("{:032x}", rand::rng().random::<u128>()),
            };
            if !self.sessions.contains_key(&id) {
                return id;
            }
            n += 1;
        }
    }

    /// Registers a session for an already generated battery.
    pub fn create_session(&mut self, seed: u64, battery: Arc<Battery>) -> Result<String, StoreError> {
        let id = self.new_session_id();
        let created_ms = now_ms();
        self.log.append(&Event::SessionCreated {
            session_id: id.clone(),
            seed,
            created_ms,
        })?;
        self.insert(id.clone(), seed, created_ms, battery);
        Ok(id)
    }

    pub fn plate_count(&self, id: &str) -> Result<usize, StoreError> {
        Ok(self.record(id)?.session.plate_count())
    }

    pub fn current_plate(&self, id: &str) -> Result<PlateView, StoreError> {
        let record = self.record(id)?;
        let plate = current(record)?;
        Ok(PlateView {
            plate_id: plate.id.clone(),
            index: record.session.cursor(),
            total: record.session.plate_count(),
            svg: render_svg(plate),
        })
    }

    pub fn state(&self, id: &str) -> Result<(SessionState, usize, usize), StoreError> {
        let s = &self.record(id)?.session;
        Ok((s.state(), s.cursor(), s.plate_count()))
    }

    /// Answers the current plate. `plate_id`, when given, must name it.
    pub fn respond(&mut self, id: &str, plate_id: Option<&str>, answer: &str) -> Result<Progress, StoreError> {
        let record = self.record(id)?;
        let current_id = current(record)?.id.clone();
        validate_answer(answer)?;
        let plate_id = plate_id.map(str::to_string).unwrap_or_else(|| current_id.clone());
        let mut session = record.session.clone();
        let state = session.submit_response(Response::new(plate_id.clone(), answer))?;
        self.log.append(&Event::Response {
            session_id: id.to_string(),
            plate_id,
            answer: answer.to_string(),
        })?;
        self.sessions.get_mut(id).expect("checked above").session = session;
        if state == SessionState::Complete {
            self.classify_session(id)?;
            return Ok(Progress::Done);
        }
        let next = self.sessions[id].session.current_plate_id().expect("in progress").to_string();
        Ok(Progress::Next(next))
    }

    fn classify_session(&mut self, id: &str) -> Result<(), StoreError> {
        let record = self.record(id)?;
        let classification = classify(&record.battery, record.session.responses())?;
        self.log.append(&Event::Classified {
            session_id: id.to_string(),
            classification: classification.clone(),
        })?;
        self.sessions.get_mut(id).expect("checked above").classification = Some(classification);
        Ok(())
    }

    /// Classification and adapted palette of a finished session. The adaptation
    /// is computed and logged on first request only.
    pub fn result(&mut self, id: &str) -> Result<(Classification, SessionAdaptation), StoreError> {
        let record = self.record(id)?;
        let Some(classification) = record.classification.clone() else {
            return Err(StoreError::NotComplete(record.session.state()));
        };
        if let Some(adaptation) = &record.adaptation {
            return Ok((classification, adaptation.clone()));
        }
        let adaptation = self.catalog.adapt(&classification);
        self.log.append(&Event::Adapted {
            session_id: id.to_string(),
            adaptation: adaptation.clone(),
        })?;
        self.sessions.get_mut(id).expect("checked above").adaptation = Some(adaptation.clone());
        Ok((classification, adaptation))
    }

    pub fn snapshots(&self) -> BTreeMap<String, SessionSnapshot> {
        self.sessions
            .iter()
            .map(|(id, r)| {
                (
                    id.clone(),
                    SessionSnapshot {
                        seed: r.seed,
                        created_ms: r.created_ms,
                        session: r.session.clone(),
                        classification: r.classification.clone(),
                        adaptation: r.adaptation.clone(),
                    },
                )
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}

fn current(record: &SessionRecord) -> Result<&IshiharaPlate, StoreError> {
    let id = record
        .session
        .current_plate_id()
        .ok_or(EngineError::State(record.session.state()))?;
    Ok(record.battery.plate(id).expect("session plates come from its battery"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_mode_ids_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<Vec<String>> = (0..2)
            .map(|i| {
                let mut store =
                    Store::open(&dir.path().join(format!("{i}.jsonl")), Catalog::builtin(), SeedMode::Fixed(3)).unwrap();
                let battery = battery_for_seed(3).unwrap();
                (0..3).map(|_| store.create_session(3, battery.clone()).unwrap()).collect()
            })
            .collect();
        assert_eq!(ids[0], ids[1]);
        assert_eq!(ids[0][0].len(), 32);
        assert_ne!(ids[0][0], ids[0][1]);
    }

    #[test]
    fn pending_classification_is_recovered() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let battery = battery_for_seed(8).unwrap();
        let mut lines = vec![serde_json::to_string(&Event::SessionCreated {
            session_id: "s".into(),
            seed: 8,
            created_ms: 1,
        })
        .unwrap()];
        for plate in &battery.plates {
            lines.push(
                serde_json::to_string(&Event::Response {
                    session_id: "s".into(),
                    plate_id: plate.id.clone(),
                    answer: plate.digits(),
                })
                .unwrap(),
            );
        }
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        let mut store = Store::open(&path, Catalog::builtin(), SeedMode::PerSession).unwrap();
        assert!(store.result("s").is_ok());
        let reopened = Store::open(&path, Catalog::builtin(), SeedMode::PerSession).unwrap();
        assert_eq!(reopened.snapshots(), store.snapshots());
    }

    #[test]
    fn replay_rejects_impossible_events() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let bad = Event::Response {
            session_id: "ghost".into(),
            plate_id: "p".into(),
            answer: "1".into(),
        };
        std::fs::write(&path, serde_json::to_string(&bad).unwrap() + "\n").unwrap();
        match Store::open(&path, Catalog::builtin(), SeedMode::PerSession) {
            Err(OpenError::Replay { line, .. }) => assert_eq!(line, 1),
            Err(e) => panic!("{e}"),
            Ok(_) => panic!("accepted a response for an unknown session"),
        }
    }
}
