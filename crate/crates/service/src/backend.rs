//! The exec() port: SQL text in, a rendered table out.

use std::path::Path;
use std::sync::Mutex;

use rusqlite::types::ValueRef;
use rusqlite::Connection;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Json>>,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("sqlite: {0}")]
    Sql(#[from] rusqlite::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("fixture has no header row")]
    NoHeader,
}

pub trait Backend: Send + Sync {
    fn execute(&self, sql: &str) -> Result<ResultTable, BackendError>;
}

/// In-memory SQLite. One connection behind a mutex: requests run
/// concurrently up to here and are serialized on the database.
pub struct SqliteBackend {
    conn: Mutex<Connection>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ColumnType {
    Integer,
    Real,
    Text,
}

impl ColumnType {
    fn of(cell: &str) -> Option<ColumnType> {
        if cell.is_empty() {
            None
        } else if cell.parse::<i64>().is_ok() {
            Some(ColumnType::Integer)
        } else if cell.parse::<f64>().is_ok() {
            Some(ColumnType::Real)
        } else {
            Some(ColumnType::Text)
        }
    }

    fn sql(self) -> &'static str {
        match self {
            ColumnType::Integer => "INTEGER",
            ColumnType::Real => "REAL",
            ColumnType::Text => "TEXT",
        }
    }
}

fn quote(ident: &str) -> String {
    format!("\"{}\"", ident.replace('"', "\"\""))
}

impl SqliteBackend {
    /// Loads a CSV with a header row into `table`; column types are the
    /// narrowest of INTEGER, REAL, TEXT fitting every non-empty cell.
    /// The connection is read-only afterwards.
    pub fn from_csv(path: &Path, table: &str) -> Result<Self, BackendError> {
        let reader = csv::Reader::from_path(path)?;
        Self::from_reader(reader, table)
    }

    pub fn from_csv_str(text: &str, table: &str) -> Result<Self, BackendError> {
        Self::from_reader(csv::Reader::from_reader(text.as_bytes()), table)
    }

    fn from_reader<R: std::io::Read>(mut reader: csv::Reader<R>, table: &str) -> Result<Self, BackendError> {
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() {
            return Err(BackendError::NoHeader);
        }
        let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
        let types: Vec<ColumnType> = (0..header.len())
            .map(|c| rows.iter().filter_map(|r| r.get(c).and_then(ColumnType::of)).max().unwrap_or(ColumnType::Text))
            .collect();

        let mut conn = Connection::open_in_memory()?;
        let cols: Vec<String> = header.iter().zip(&types).map(|(h, t)| format!("{} {}", quote(h), t.sql())).collect();
        conn.execute(&format!("CREATE TABLE {} ({})", quote(table), cols.join(", ")), [])?;
        let tx = conn.transaction()?;
        {
            let marks = vec!["?"; header.len()].join(", ");
            let mut insert = tx.prepare(&format!("INSERT INTO {} VALUES ({marks})", quote(table)))?;
            for r in &rows {
                let cells = (0..header.len()).map(|c| {
                    let cell = r.get(c).unwrap_or("");
                    match (cell.is_empty(), types[c]) {
                        (true, _) => rusqlite::types::Value::Null,
                        (_, ColumnType::Integer) => rusqlite::types::Value::Integer(cell.parse().expect("typed above")),
                        (_, ColumnType::Real) => rusqlite::types::Value::Real(cell.parse().expect("typed above")),
                        (_, ColumnType::Text) => rusqlite::types::Value::Text(cell.to_string()),
                    }
                });
                insert.execute(rusqlite::params_from_iter(cells))?;
            }
        }
        tx.commit()?;
        conn.pragma_update(None, "query_only", true)?;
        tracing::info!(table, rows = rows.len(), "fixture loaded");
        Ok(SqliteBackend { conn: Mutex::new(conn) })
    }
}

impl Backend for SqliteBackend {
    fn execute(&self, sql: &str) -> Result<ResultTable, BackendError> {
        let conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        let mut stmt = conn.prepare(sql)?;
        let columns: Vec<String> = stmt.column_names().into_iter().map(str::to_string).collect();
        let n = columns.len();
        let mut out = Vec::new();
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let mut cells = Vec::with_capacity(n);
            for i in 0..n {
                cells.push(match row.get_ref(i)? {
                    ValueRef::Null => Json::Null,
                    ValueRef::Integer(v) => v.into(),
                    ValueRef::Real(v) => serde_json::Number::from_f64(v).map_or(Json::Null, Json::Number),
                    ValueRef::Text(t) => String::from_utf8_lossy(t).into_owned().into(),
                    ValueRef::Blob(b) => format!("<{} bytes>", b.len()).into(),
                });
            }
            out.push(cells);
        }
        Ok(ResultTable { columns, rows: out })
    }
}
