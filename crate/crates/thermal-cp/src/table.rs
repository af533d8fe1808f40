//! Delimited result tables with a key-value metadata header.
//!
//! ```text
//! # schema = thermal-cp-table/1
//! # scene_hash = 3f9a0c1d22b7e410
//! # timestamp = unix:1760000000
//! T [K]	U_total [eV]
//! 3.00000000e2	-1.23456789e-9
//! FAILED	6.00000000e2	no convergence: ...
//! ```
//!
//! Numbers carry 9 significant digits. The timestamp line is the only
//! part that differs between two runs of the same scene.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "thermal-cp-table/1";
const TIMESTAMP_KEY: &str = "timestamp";
const FAILED: &str = "FAILED";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Column {
            name: name.into(),
            unit: unit.into(),
        }
    }

    fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Values(Vec<f64>),
    /// Marks where a sweep stopped: the sweep value and the error.
    Failed { at: f64, message: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Ordered metadata; `schema` is always written first.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

/// Formats with 9 significant digits.
pub fn format_number(v: f64) -> String {
    // −0 prints as 0 so identical results render identically
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table {
            metadata: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', " ");
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key.into(), value)),
        }
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::validation(format!(
                "row has {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        self.rows.push(Row::Values(values));
        Ok(())
    }

    pub fn push_failure(&mut self, at: f64, error: &Error) {
        self.rows.push(Row::Failed {
            at,
            message: error.to_string().replace(['\n', '\t'], " "),
        });
    }

    /// Value rows only.
    pub fn values(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().filter_map(|r| match r {
            Row::Values(v) => Some(v.as_slice()),
            Row::Failed { .. } => None,
        })
    }

    /// Renders the table; `timestamp` adds the wall-clock metadata line.
    pub fn render(&self, timestamp: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema = {SCHEMA_VERSION}");
        for (k, v) in &self.metadata {
            if k != "schema" && k != TIMESTAMP_KEY {
                let _ = writeln!(out, "# {k} = {v}");
            }
        }
        if timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(out, "# {TIMESTAMP_KEY} = unix:{secs}");
        }
        let header: Vec<String> = self.columns.iter().map(Column::header).collect();
        let _ = writeln!(out, "{}", header.join("\t"));
        for row in &self.rows {
            match row {
                Row::Values(v) => {
                    let cells: Vec<String> = v.iter().map(|&x| format_number(x)).collect();
                    let _ = writeln!(out, "{}", cells.join("\t"));
                }
                Row::Failed { at, message } => {
                    let _ = writeln!(out, "{FAILED}\t{}\t{message}", format_number(*at));
                }
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render(true)).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Table::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Table> {
        let bad = |line: usize, msg: String| Error::validation(format!("table line {}: {msg}", line + 1));
        let mut table = Table::default();
        let mut header = false;
        for (n, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                if header {
                    return Err(bad(n, "metadata after the header row".into()));
                }
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| bad(n, format!("expected 'key = value', got '{rest}'")))?;
                table.metadata.push((k.trim().into(), v.trim().into()));
                continue;
            }
            if !header {
                for cell in line.split('\t').filter(|c| !c.is_empty()) {
                    let (name, unit) = cell
                        .strip_suffix(']')
                        .and_then(|c| c.rsplit_once(" ["))
                        .ok_or_else(|| bad(n, format!("column '{cell}' lacks a [unit]")))?;
                    table.columns.push(Column::new(name, unit));
                }
                header = true;
                continue;
            }
            let mut cells = line.split('\t');
            if line.starts_with(FAILED) {
                cells.next();
                let at = cells
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| bad(n, "failure row without a sweep value".into()))?;
                table.rows.push(Row::Failed {
                    at,
                    message: cells.collect::<Vec<_>>().join("\t"),
                });
                continue;
            }
            let values = cells
                .map(|c| c.parse::<f64>().map_err(|e| bad(n, format!("'{c}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(values).map_err(|e| bad(n, e.to_string()))?;
        }
        match table.metadata.first() {
            Some((k, v)) if k == "schema" && v == SCHEMA_VERSION => {}
            _ => return Err(Error::validation(format!("table does not declare schema {SCHEMA_VERSION}"))),
        }
        if !header {
            return Err(Error::validation("table has no header row"));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec![Column::new("T", "K"), Column::new("U_total", "eV")]);
        t.meta("m_sum", "m>=0,w0=1/2");
        t.push(vec![300.0, -1.234_567_891_234e-9]).unwrap();
        t
    }

    #[test]
    fn round_trip_reproduces_rendering() {
        let t = sample();
        let text = t.render(false);
        let back = Table::parse(&text).unwrap();
        assert_eq!(back.render(false), text);
        assert_eq!(back.get_meta("m_sum"), Some("m>=0,w0=1/2"));
        assert_eq!(back.values().next().unwrap()[1], -1.23456789e-9);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(vec![Column::new("T", "K")]);
        let text = t.render(false);
        assert_eq!(text, format!("# schema = {SCHEMA_VERSION}\nT [K]\n"));
        assert!(Table::parse(&text).unwrap().rows.is_empty());
    }

    #[test]
    fn failure_rows_survive() {
        let mut t = sample();
        t.push_failure(600.0, &Error::validation("boom"));
        let back = Table::parse(&t.render(true)).unwrap();
        assert!(matches!(&back.rows[1], Row::Failed { at, message } if *at == 600.0 && message.contains("boom")));
    }

    #[test]
    fn ragged_row_is_rejected() {
        assert!(sample().push(vec![1.0]).is_err());
    }
}
