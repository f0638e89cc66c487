use serde::{Deserialize, Serialize};

use crate::table::{CellValue, ColumnType, Table};

/// A one-dimensional labelled vector, the result of selecting a column or of
/// an element-wise operation. All non-null elements have type `ctype`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: Option<String>,
    pub ctype: ColumnType,
    pub values: Vec<CellValue>,
    /// Index labels, one per value: source row numbers or group keys.
    pub labels: Vec<CellValue>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn present(&self) -> impl Iterator<Item = &CellValue> {
        self.values.iter().filter(|v| !v.is_null())
    }
}

/// One row of a table, addressed by column name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: i64,
    pub columns: Vec<String>,
    pub cells: Vec<CellValue>,
}

/// Result of evaluating an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Value {
    Scalar(CellValue),
    Vector(Series),
    SubTable(Table),
    List(Vec<CellValue>),
    /// `(rows, columns)` of a table.
    Pair(i64, i64),
    Row(Row),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Vector(_) => "vector",
            Value::SubTable(_) => "table",
            Value::List(_) => "list",
            Value::Pair(..) => "pair",
            Value::Row(_) => "row",
        }
    }

    /// Human-readable rendering used by the CLI and in reports.
    pub fn render(&self) -> String {
        match self {
            Value::Scalar(v) => v.to_display(),
            Value::Vector(s) => {
                let items: Vec<String> = s
                    .labels
                    .iter()
                    .zip(&s.values)
                    .map(|(l, v)| format!("{}: {}", l.to_display(), v.to_display()))
                    .collect();
                format!("[{}]", items.join(", "))
            }
            Value::List(items) => {
                format!(
                    "[{}]",
                    items
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            }
            Value::Pair(a, b) => format!("({a}, {b})"),
            Value::Row(r) => {
                let items: Vec<String> = r
                    .columns
                    .iter()
                    .zip(&r.cells)
                    .map(|(c, v)| format!("{c}: {}", v.to_display()))
                    .collect();
                format!("{{{}}}", items.join(", "))
            }
            Value::SubTable(t) => {
                crate::table::render_for_prompt(t, crate::table::RenderLimits::default())
            }
        }
    }
}
