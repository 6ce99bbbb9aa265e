//! Result tables and their on-disk forms.
//!
//! CSV cells are written with Rust's shortest round-trip rendering of f64,
//! so re-parsing an emitted file reproduces every value bit for bit and two
//! identical runs produce identical bytes. Nothing time- or host-dependent
//! goes into the CSV; wall time stays in the in-memory metadata.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{serialize_config, ExperimentConfig};

/// A rectangular table of finite reals with named columns.
#[derive(Clone, Debug)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    pub metadata: TableMetadata,
}

/// Run provenance that stays with the in-memory table.
#[derive(Clone, Debug)]
pub struct TableMetadata {
    pub config_digest: String,
    pub core_version: String,
    pub cli_version: String,
    pub wall_time_ms: f64,
}

impl TableMetadata {
    pub fn new(config_digest: String) -> Self {
        Self {
            config_digest,
            core_version: zenosim_core::VERSION.to_string(),
            cli_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: 0.0,
        }
    }
}

#[derive(Debug)]
pub enum TableError {
    RaggedRow { expected: usize, got: usize },
    NonFinite { column: String, row: usize },
    EmptyHeader,
}

impl std::fmt::Display for TableError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableError::RaggedRow { expected, got } => {
                write!(f, "row has {got} cells, table has {expected} columns")
            }
            TableError::NonFinite { column, row } => {
                write!(f, "non-finite value in column `{column}`, row {row}")
            }
            TableError::EmptyHeader => write!(f, "a table needs at least one column"),
        }
    }
}

impl std::error::Error for TableError {}

impl ResultTable {
    pub fn new(columns: Vec<String>, metadata: TableMetadata) -> Result<Self, TableError> {
        if columns.is_empty() {
            return Err(TableError::EmptyHeader);
        }
        Ok(Self {
            columns,
            rows: Vec::new(),
            metadata,
        })
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::RaggedRow {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(TableError::NonFinite {
                    column: self.columns[j].clone(),
                    row: self.rows.len(),
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of one named column, top to bottom.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// The CSV document: header line plus one line per row, `\n` endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for &x in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format_cell(x));
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest decimal string that parses back to exactly `x`.
fn format_cell(x: f64) -> String {
    format!("{x}")
}

/// Writes the table as CSV.
pub fn emit_csv(table: &ResultTable, path: &Path) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(table.to_csv().as_bytes())?;
    Ok(())
}

/// Parses a CSV document written by `emit_csv` back into columns and rows.
/// Used to check the bitwise round trip.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty document")?;
    let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(columns.len());
        for cell in line.split(',') {
            row.push(
                cell.parse::<f64>()
                    .map_err(|e| format!("row {i}: bad cell `{cell}`: {e}"))?,
            );
        }
        if row.len() != columns.len() {
            return Err(format!("row {i} has {} cells, expected {}", row.len(), columns.len()));
        }
        rows.push(row);
    }
    Ok((columns, rows))
}

/// The JSON summary written next to every CSV: which run produced it and
/// the headline numbers. Scalars are keyed alphabetically, so identical
/// runs serialize identically.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub trials: usize,
    pub versions: Versions,
    pub scalars: Map<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub core: String,
    pub cli: String,
}

impl RunSummary {
    pub fn new(experiment: &str, config_digest: String) -> Self {
        Self {
            experiment: experiment.to_string(),
            preset: None,
            config_digest,
            seed: None,
            trials: 0,
            versions: Versions {
                core: zenosim_core::VERSION.to_string(),
                cli: env!("CARGO_PKG_VERSION").to_string(),
            },
            scalars: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.scalars.insert(key.to_string(), value.into());
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.scalars.get(key).and_then(Value::as_f64)
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.scalars.get(key).and_then(Value::as_bool)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
        text.push('\n');
        text
    }
}

/// Writes the JSON summary.
pub fn emit_summary(summary: &RunSummary, path: &Path) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(summary.to_json().as_bytes())?;
    Ok(())
}

/// Hex SHA-256 of the canonical serialization of a config: the identity of a
/// run for reproducibility bookkeeping.
pub fn config_digest(config: &ExperimentConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serialize_config(config).as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_with(rows: &[&[f64]]) -> ResultTable {
        let mut t = ResultTable::new(
            vec!["a".into(), "b".into()],
            TableMetadata::new("digest".into()),
        )
        .unwrap();
        for r in rows {
            t.push_row(r.to_vec()).unwrap();
        }
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = table_with(&[]);
        assert_eq!(t.to_csv(), "a,b\n");
    }

    #[test]
    fn ragged_and_non_finite_rows_are_rejected() {
        let mut t = table_with(&[]);
        assert!(matches!(
            t.push_row(vec![1.0]),
            Err(TableError::RaggedRow { expected: 2, got: 1 })
        ));
        assert!(matches!(
            t.push_row(vec![1.0, f64::NAN]),
            Err(TableError::NonFinite { .. })
        ));
        assert!(t.push_row(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn csv_round_trip_is_bitwise_exact() {
        // Values chosen to stress the shortest-representation printer.
        let awkward = [
            0.1,
            1.0 / 3.0,
            2.0_f64.sqrt(),
            6.0221407599999997e23,
            5e-324,           // smallest subnormal
            f64::MAX,
            -0.0,
            1.0 + f64::EPSILON,
        ];
        let mut t = table_with(&[]);
        for pair in awkward.chunks(2) {
            t.push_row(vec![pair[0], pair[1]]).unwrap();
        }
        let (cols, rows) = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(cols, t.columns());
        for (orig, back) in t.rows().iter().zip(&rows) {
            for (a, b) in orig.iter().zip(back) {
                assert_eq!(a.to_bits(), b.to_bits(), "{a} reparsed as {b}");
            }
        }
    }

    #[test]
    fn column_lookup_by_name() {
        let t = table_with(&[&[1.0, 10.0], &[2.0, 20.0]]);
        assert_eq!(t.column("b").unwrap(), vec![10.0, 20.0]);
        assert!(t.column("missing").is_none());
    }

    #[test]
    fn summary_json_is_deterministic_and_carries_the_digest() {
        let mut s = RunSummary::new("zeno-qubit", "abc123".into());
        s.set("zeta", 1.0);
        s.set("alpha", 2.0);
        let a = s.to_json();
        let b = s.to_json();
        assert_eq!(a, b);
        assert!(a.contains("abc123"));
        // Alphabetical scalar order regardless of insertion order.
        assert!(a.find("alpha").unwrap() < a.find("zeta").unwrap());
    }
}
