use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Domain,
    Defect,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Domain => 1,
            Status::Defect => 2,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn domain(message: impl Display) -> Self {
        Failure {
            status: Status::Domain,
            message: message.to_string(),
        }
    }

    pub fn defect(message: impl Display) -> Self {
        Failure {
            status: Status::Defect,
            message: message.to_string(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Echo of everything that determines a report.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub tool_version: &'static str,
    pub inputs: Vec<InputHash>,
    pub config: Value,
    pub outcome: String,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, config: Value) -> Self {
        RunManifest {
            subcommand,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            config,
            outcome: String::new(),
        }
    }

    /// Reads `path` and records its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::domain(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).map_err(|_| Failure::domain(format!("{} is not UTF-8", path.display())))
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::domain(format!("cannot write {}: {e}", path.display())))
}

/// Writes `{manifest, result}` to `dest`, or to stdout when `dest` is `None`.
pub fn emit<T: Serialize>(manifest: &RunManifest, result: &T, dest: Option<&PathBuf>) -> Result<(), Failure> {
    let text = to_pretty(&Report { manifest, result });
    match dest {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
