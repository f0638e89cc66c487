//! Typed, immutable columnar relations.
//!
//! A [`Table`] is built once by [`load_table`] (or [`Table::from_text_rows`])
//! and never mutated afterwards; everything downstream borrows it.

mod infer;
mod load;
mod render;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use infer::{infer_column_type, parse_cell, DEFAULT_NULL_TOKENS};
pub(crate) use load::unescape_wtq;
pub use load::{load_table, load_table_with, normalize_column_names, CorpusProfile, TableFormat};
pub use render::{render_for_prompt, RenderLimits};

/// Declared type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Int,
    Float,
    Text,
    Bool,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Int | ColumnType::Float)
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Float => "float",
            ColumnType::Text => "text",
            ColumnType::Bool => "bool",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single cell. `Float` is always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum CellValue {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl CellValue {
    /// Builds a float cell, mapping non-finite values to `Null`.
    pub fn float(v: f64) -> CellValue {
        if v.is_finite() {
            CellValue::Float(v)
        } else {
            CellValue::Null
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, CellValue::Null)
    }

    /// The column type this cell belongs to, `None` for `Null`.
    pub fn ctype(&self) -> Option<ColumnType> {
        match self {
            CellValue::Int(_) => Some(ColumnType::Int),
            CellValue::Float(_) => Some(ColumnType::Float),
            CellValue::Text(_) => Some(ColumnType::Text),
            CellValue::Bool(_) => Some(ColumnType::Bool),
            CellValue::Null => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            CellValue::Int(i) => Some(*i as f64),
            CellValue::Float(f) => Some(*f),
            _ => None,
        }
    }

    /// Python-style `str()` rendering (`True`, `3.0`, `nan` for missing).
    pub fn to_display(&self) -> String {
        match self {
            CellValue::Int(i) => i.to_string(),
            CellValue::Float(f) => format_float(*f),
            CellValue::Text(s) => s.clone(),
            CellValue::Bool(true) => "True".to_string(),
            CellValue::Bool(false) => "False".to_string(),
            CellValue::Null => "nan".to_string(),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Text(s) => write!(f, "'{s}'"),
            other => f.write_str(&other.to_display()),
        }
    }
}

/// Formats a finite float the way Python's `repr` does for the common range:
/// integral values keep a trailing `.0`, very large or small magnitudes use
/// exponent notation with an explicit sign.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return "nan".to_string();
    }
    let abs = v.abs();
    if abs != 0.0 && !(1e-4..1e16).contains(&abs) {
        let s = format!("{v:e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let exp: i32 = exp.parse().expect("exponent digits");
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Column metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub ctype: ColumnType,
    pub null_count: usize,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TableError {
    #[error("malformed source: {0}")]
    MalformedSource(String),
    #[error("table has no data rows")]
    EmptyTable,
}

/// Immutable typed relation, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    name: String,
    columns: Vec<ColumnMeta>,
    rows: Vec<Vec<CellValue>>,
}

impl Table {
    /// Builds a table from a raw header and raw text rows, normalizing names
    /// and inferring every column's type.
    pub fn from_text_rows(
        name: impl Into<String>,
        header: &[String],
        raw_rows: &[Vec<String>],
        null_tokens: &[&str],
    ) -> Result<Table, TableError> {
        if header.is_empty() {
            return Err(TableError::MalformedSource("missing header".into()));
        }
        if raw_rows.is_empty() {
            return Err(TableError::EmptyTable);
        }
        for (i, row) in raw_rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(TableError::MalformedSource(format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    row.len(),
                    header.len()
                )));
            }
        }
        let names = normalize_column_names(header);
        let mut rows: Vec<Vec<CellValue>> = vec![Vec::with_capacity(header.len()); raw_rows.len()];
        let mut columns = Vec::with_capacity(header.len());
        for (c, name) in names.into_iter().enumerate() {
            let raw: Vec<&str> = raw_rows.iter().map(|r| r[c].as_str()).collect();
            let (ctype, cells) = infer_column_type(&raw, null_tokens);
            let null_count = cells.iter().filter(|v| v.is_null()).count();
            for (row, cell) in rows.iter_mut().zip(cells) {
                row.push(cell);
            }
            columns.push(ColumnMeta {
                name,
                ctype,
                null_count,
            });
        }
        Ok(Table {
            name: name.into(),
            columns,
            rows,
        })
    }

    /// Builds a table from already-typed columns. Names must be unique and
    /// every cell must conform to its column type.
    pub fn from_typed(
        name: impl Into<String>,
        columns: Vec<(String, ColumnType)>,
        rows: Vec<Vec<CellValue>>,
    ) -> Result<Table, TableError> {
        let mut seen = std::collections::HashSet::new();
        for (n, _) in &columns {
            if !seen.insert(n.as_str()) {
                return Err(TableError::MalformedSource(format!(
                    "duplicate column '{n}'"
                )));
            }
        }
        let mut metas: Vec<ColumnMeta> = columns
            .into_iter()
            .map(|(name, ctype)| ColumnMeta {
                name,
                ctype,
                null_count: 0,
            })
            .collect();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != metas.len() {
                return Err(TableError::MalformedSource(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    row.len(),
                    metas.len()
                )));
            }
            for (meta, cell) in metas.iter_mut().zip(row) {
                match cell.ctype() {
                    None => meta.null_count += 1,
                    Some(t) if t == meta.ctype => {}
                    Some(t) => {
                        return Err(TableError::MalformedSource(format!(
                            "cell {cell} in column '{}' is {t}, column is {}",
                            meta.name, meta.ctype
                        )))
                    }
                }
                if let CellValue::Float(f) = cell {
                    if !f.is_finite() {
                        return Err(TableError::MalformedSource("non-finite float".into()));
                    }
                }
            }
        }
        Ok(Table {
            name: name.into(),
            columns: metas,
            rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn cell(&self, row: usize, col: usize) -> &CellValue {
        &self.rows[row][col]
    }

    /// Copies the given rows (in the given order) into a new table that keeps
    /// this table's column types.
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        let picked: Vec<Vec<CellValue>> = rows.iter().map(|&r| self.rows[r].clone()).collect();
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(c, meta)| ColumnMeta {
                name: meta.name.clone(),
                ctype: meta.ctype,
                null_count: picked.iter().filter(|row| row[c].is_null()).count(),
            })
            .collect();
        Table {
            name: self.name.clone(),
            columns,
            rows: picked,
        }
    }
}
