//! Query logs: JSON-Lines with `pid` and `query`, optional `tstamp` and
//! `user`; anything else is kept as metadata.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{parse_query, AstError, AstNode, SQL_SUBSET};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub pid: String,
    pub source: String,
    pub ast: AstNode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tstamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl QueryEntry {
    pub fn parse(pid: impl Into<String>, source: impl Into<String>) -> Result<Self, AstError> {
        let source = source.into();
        let ast = parse_query(&source, SQL_SUBSET)?;
        Ok(QueryEntry { pid: pid.into(), source, ast, tstamp: None, user: None, extra: BTreeMap::new() })
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate pid {pid}")]
    DuplicatePid { line: usize, pid: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A query that failed to parse. It stays in the log's denominator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejected {
    pub line: usize,
    pub pid: String,
    pub error: String,
}

#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    pub entries: Vec<QueryEntry>,
    pub rejected: Vec<Rejected>,
}

impl QueryLog {
    /// Entries that parsed plus those that did not.
    pub fn total(&self) -> usize {
        self.entries.len() + self.rejected.len()
    }
}

#[derive(Deserialize)]
struct RawLine {
    pid: serde_json::Value,
    query: String,
    #[serde(default)]
    tstamp: Option<String>,
    #[serde(default)]
    user: Option<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

/// Reads a JSONL log. Malformed lines and duplicate pids are errors;
/// queries outside the supported grammar are recorded as rejected.
pub fn read_log(reader: impl BufRead) -> Result<QueryLog, LogError> {
    let mut log = QueryLog::default();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawLine =
            serde_json::from_str(&line).map_err(|e| LogError::Format { line: line_no, message: e.to_string() })?;
        let pid = match raw.pid {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            _ => return Err(LogError::Format { line: line_no, message: "pid must be a string".into() }),
        };
        if !seen.insert(pid.clone()) {
            return Err(LogError::DuplicatePid { line: line_no, pid });
        }
        match parse_query(&raw.query, SQL_SUBSET) {
            Ok(ast) => log.entries.push(QueryEntry {
                pid,
                source: raw.query,
                ast,
                tstamp: raw.tstamp,
                user: raw.user,
                extra: raw.extra,
            }),
            Err(e) => {
                tracing::warn!(line = line_no, %pid, error = %e, "query rejected");
                log.rejected.push(Rejected { line: line_no, pid, error: e.to_string() });
            }
        }
    }
    Ok(log)
}

pub fn read_log_file(path: &std::path::Path) -> Result<QueryLog, LogError> {
    let f = std::fs::File::open(path)?;
    read_log(std::io::BufReader::new(f))
}

/// Serializes entries back to the ingestion format.
pub fn write_log(entries: &[QueryEntry], mut out: impl std::io::Write) -> std::io::Result<()> {
    for e in entries {
        let mut obj = serde_json::Map::new();
        obj.insert("pid".into(), e.pid.clone().into());
        obj.insert("query".into(), e.source.clone().into());
        if let Some(t) = &e.tstamp {
            obj.insert("tstamp".into(), t.clone().into());
        }
        if let Some(u) = &e.user {
            obj.insert("user".into(), u.clone().into());
        }
        for (k, v) in &e.extra {
            obj.insert(k.clone(), v.clone());
        }
        writeln!(out, "{}", serde_json::Value::Object(obj))?;
    }
    Ok(())
}
