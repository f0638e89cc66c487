use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fact,
    Qa,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "fact" => Ok(Mode::Fact),
            "qa" => Ok(Mode::Qa),
            other => Err(format!("unknown mode '{other}', expected fact or qa")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fact => "fact",
            Mode::Qa => "qa",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailed,
    Refuted,
}

impl Label {
    pub fn from_verdict(v: bool) -> Label {
        if v {
            Label::Entailed
        } else {
            Label::Refuted
        }
    }

    pub fn as_bool(self) -> bool {
        self == Label::Entailed
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Entailed => "entailed",
            Label::Refuted => "refuted",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One statement or question paired with its table and query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    pub mode: Mode,
    pub statement_or_question: String,
    pub table_ref: String,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    /// Stage tags in the order they were applied.
    #[serde(default)]
    pub provenance: Vec<String>,
}

impl DatasetEntry {
    pub fn fact(
        id: impl Into<String>,
        statement: impl Into<String>,
        table_ref: impl Into<String>,
        label: Label,
    ) -> Self {
        DatasetEntry {
            id: id.into(),
            mode: Mode::Fact,
            statement_or_question: statement.into(),
            table_ref: table_ref.into(),
            query: String::new(),
            label: Some(label),
            answer: None,
            provenance: Vec::new(),
        }
    }

    pub fn qa(
        id: impl Into<String>,
        question: impl Into<String>,
        table_ref: impl Into<String>,
        answer: impl Into<String>,
    ) -> Self {
        DatasetEntry {
            id: id.into(),
            mode: Mode::Qa,
            statement_or_question: question.into(),
            table_ref: table_ref.into(),
            query: String::new(),
            label: None,
            answer: Some(answer.into()),
            provenance: Vec::new(),
        }
    }

    pub fn with_query(mut self, query: impl Into<String>) -> Self {
        self.query = query.into();
        self
    }

    pub fn tag(&mut self, stage: &str) {
        self.provenance.push(stage.to_string());
    }
}

/// Tables addressed by the `table_ref` of dataset entries.
#[derive(Debug, Clone, Default)]
pub struct TableCatalog {
    tables: HashMap<String, Arc<Table>>,
}

impl TableCatalog {
    pub fn new() -> TableCatalog {
        TableCatalog::default()
    }

    pub fn insert(&mut self, table_ref: impl Into<String>, table: Table) {
        self.tables.insert(table_ref.into(), Arc::new(table));
    }

    pub fn get(&self, table_ref: &str) -> Option<&Table> {
        self.tables.get(table_ref).map(|t| t.as_ref())
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn refs(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    /// Adds every table of `other`; on a shared ref `other` wins.
    pub fn extend(&mut self, other: TableCatalog) {
        self.tables.extend(other.tables);
    }
}

impl FromIterator<(String, Table)> for TableCatalog {
    fn from_iter<I: IntoIterator<Item = (String, Table)>>(iter: I) -> Self {
        let mut c = TableCatalog::new();
        for (k, t) in iter {
            c.insert(k, t);
        }
        c
    }
}
