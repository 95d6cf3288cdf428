//! Append-only session store: one JSON-lines file per patient alias, one
//! complete [`SessionLog`] per line, plus `index.jsonl` recording the global
//! insertion order.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{GameError, SessionLog, SessionSummary};

const INDEX_FILE: &str = "index.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexEntry {
    session_id: String,
    patient_alias: String,
}

/// A listing row: everything but the raw lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub patient_alias: String,
    pub started_at: DateTime<Utc>,
    pub summary: SessionSummary,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, GameError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| GameError::Io {
            path: root.clone(),
            source,
        })?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Verifies and appends `log`; returns its id.
    pub fn persist(&self, log: &SessionLog) -> Result<String, GameError> {
        let alias = &log.patient_alias;
        if alias.is_empty() || !alias.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(GameError::Alias(alias.clone()));
        }
        log.verify()?;
        if self.index()?.iter().any(|e| e.session_id == log.session_id) {
            return Err(GameError::Duplicate(log.session_id.clone()));
        }
        let line = serde_json::to_string(log).map_err(|e| GameError::Integrity {
            session_id: log.session_id.clone(),
            detail: e.to_string(),
        })?;
        append_line(&self.alias_path(alias), &line)?;
        let entry = IndexEntry {
            session_id: log.session_id.clone(),
            patient_alias: alias.clone(),
        };
        append_line(
            &self.root.join(INDEX_FILE),
            &serde_json::to_string(&entry).expect("index entry serializes"),
        )?;
        Ok(log.session_id.clone())
    }

    /// Session ids in insertion order.
    pub fn list(&self) -> Result<Vec<String>, GameError> {
        Ok(self.index()?.into_iter().map(|e| e.session_id).collect())
    }

    /// Listing rows in insertion order; every log is verified.
    pub fn list_info(&self) -> Result<Vec<SessionInfo>, GameError> {
        let mut out = Vec::new();
        for entry in self.index()? {
            let log = self.get(&entry.session_id)?;
            out.push(SessionInfo {
                session_id: log.session_id,
                patient_alias: log.patient_alias,
                started_at: log.started_at,
                summary: log.summary,
            });
        }
        Ok(out)
    }

    pub fn get(&self, session_id: &str) -> Result<SessionLog, GameError> {
        let entry = self
            .index()?
            .into_iter()
            .find(|e| e.session_id == session_id)
            .ok_or_else(|| GameError::NotFound(session_id.to_string()))?;
        let path = self.alias_path(&entry.patient_alias);
        for (line_no, line) in read_lines(&path)? {
            let log: SessionLog = serde_json::from_str(&line).map_err(|e| GameError::Corrupt {
                path: path.clone(),
                line: line_no,
                detail: e.to_string(),
            })?;
            if log.session_id == session_id {
                log.verify()?;
                return Ok(log);
            }
        }
        Err(GameError::Corrupt {
            path,
            line: 0,
            detail: format!("indexed session `{session_id}` is missing"),
        })
    }

    fn alias_path(&self, alias: &str) -> PathBuf {
        self.root.join(format!("{alias}.jsonl"))
    }

    fn index(&self) -> Result<Vec<IndexEntry>, GameError> {
        let path = self.root.join(INDEX_FILE);
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_lines(&path)?
            .into_iter()
            .map(|(line_no, line)| {
                serde_json::from_str(&line).map_err(|e| GameError::Corrupt {
                    path: path.clone(),
                    line: line_no,
                    detail: e.to_string(),
                })
            })
            .collect()
    }
}

fn append_line(path: &Path, line: &str) -> Result<(), GameError> {
    let io = |source| GameError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    writeln!(f, "{line}").map_err(io)?;
    f.sync_data().map_err(io)
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, GameError> {
    let io = |source| GameError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}
