//! Inputs and outputs, where `-` stands for stdin or stdout.

use std::io::{self, Read, Write};
use std::path::Path;

use chromascreen::engine::{Battery, Response};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{display, CliError};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if path == Path::new("-") {
        io::stdin().read_to_end(&mut buf).map_err(|e| CliError::io(path, e))?;
    } else {
        buf = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    }
    Ok(buf)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if path == Path::new("-") {
        let mut out = io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
    } else {
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::usage(format!("{}: {e}", display(path))))
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::usage(e.to_string()))?;
    text.push('\n');
    write_bytes(Path::new("-"), text.as_bytes())
}

/// Contents of `key.json`: the full battery and the plate image files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFile {
    pub files: Vec<String>,
    pub battery: Battery,
}

impl KeyFile {
    pub fn new(battery: Battery) -> Self {
        let files = battery.plates.iter().map(|p| svg_name(&p.id)).collect();
        KeyFile { files, battery }
    }
}

pub fn svg_name(plate_id: &str) -> String {
    format!("{plate_id}.svg")
}

/// Answers to one battery, as written by `respond` and read by `classify`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseFile {
    pub battery_id: String,
    pub responses: Vec<Response>,
}
