use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Table, TableError, DEFAULT_NULL_TOKENS};

/// On-disk table layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    /// RFC-4180 CSV. The delimiter can be overridden by a [`CorpusProfile`]
    /// (TabFact's release uses `#`).
    Csv,
    /// RFC-4180 style with tab delimiters.
    Tsv,
    /// JSON object `{"header": [...], "rows": [[...], ...]}`.
    TabfactJson,
    /// WikiTableQuestions `.tsv` tables: unquoted, with `\n`, `\p` (pipe)
    /// and `\\` escapes.
    WtqTsv,
}

impl TableFormat {
    /// Guesses the format from a file extension.
    pub fn from_extension(path: &std::path::Path) -> Option<TableFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(TableFormat::Csv),
            "tsv" => Some(TableFormat::WtqTsv),
            "json" => Some(TableFormat::TabfactJson),
            _ => None,
        }
    }
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "csv" => Ok(TableFormat::Csv),
            "tsv" => Ok(TableFormat::Tsv),
            "tabfact_json" => Ok(TableFormat::TabfactJson),
            "wtq_tsv" => Ok(TableFormat::WtqTsv),
            other => Err(format!("unknown table format '{other}'")),
        }
    }
}

/// Per-corpus ingestion settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusProfile {
    /// Delimiter for `Csv` sources; `None` keeps `,`.
    pub delimiter: Option<char>,
    /// Only `utf-8` is supported.
    pub encoding: String,
    pub null_tokens: Vec<String>,
}

impl Default for CorpusProfile {
    fn default() -> Self {
        CorpusProfile {
            delimiter: None,
            encoding: "utf-8".to_string(),
            null_tokens: DEFAULT_NULL_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl CorpusProfile {
    pub fn tabfact() -> Self {
        CorpusProfile {
            delimiter: Some('#'),
            ..Default::default()
        }
    }
}

/// Loads a table with the default profile.
pub fn load_table(source: &[u8], format: TableFormat) -> Result<Table, TableError> {
    load_table_with(source, format, &CorpusProfile::default(), "table")
}

pub fn load_table_with(
    source: &[u8],
    format: TableFormat,
    profile: &CorpusProfile,
    name: &str,
) -> Result<Table, TableError> {
    if !profile.encoding.eq_ignore_ascii_case("utf-8")
        && !profile.encoding.eq_ignore_ascii_case("utf8")
    {
        return Err(TableError::MalformedSource(format!(
            "unsupported encoding '{}'",
            profile.encoding
        )));
    }
    let text = std::str::from_utf8(source)
        .map_err(|e| TableError::MalformedSource(format!("invalid UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let (header, rows) = match format {
        TableFormat::Csv => read_delimited(text, profile.delimiter.unwrap_or(','))?,
        TableFormat::Tsv => read_delimited(text, profile.delimiter.unwrap_or('\t'))?,
        TableFormat::WtqTsv => read_wtq(text)?,
        TableFormat::TabfactJson => read_json(text)?,
    };
    let tokens: Vec<&str> = profile.null_tokens.iter().map(String::as_str).collect();
    Table::from_text_rows(name, &header, &rows, &tokens)
}

type RawRows = (Vec<String>, Vec<Vec<String>>);

fn read_delimited(text: &str, delimiter: char) -> Result<RawRows, TableError> {
    if !delimiter.is_ascii() {
        return Err(TableError::MalformedSource(format!(
            "delimiter {delimiter:?} is not ASCII"
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter as u8)
        .has_headers(false)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        Some(Ok(rec)) => rec.iter().map(str::to_string).collect(),
        Some(Err(e)) => return Err(TableError::MalformedSource(e.to_string())),
        None => return Err(TableError::MalformedSource("missing header".into())),
    };
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| TableError::MalformedSource(e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub(crate) fn unescape_wtq(cell: &str) -> String {
    let mut out = String::with_capacity(cell.len());
    let mut chars = cell.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('p') => out.push('|'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

fn read_wtq(text: &str) -> Result<RawRows, TableError> {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header: Vec<String> = match lines.next() {
        Some(l) => l.split('\t').map(unescape_wtq).collect(),
        None => return Err(TableError::MalformedSource("missing header".into())),
    };
    let rows = lines
        .map(|l| l.split('\t').map(unescape_wtq).collect())
        .collect();
    Ok((header, rows))
}

#[derive(Deserialize)]
struct JsonTable {
    header: Vec<serde_json::Value>,
    rows: Vec<Vec<serde_json::Value>>,
    #[serde(flatten)]
    _rest: HashMap<String, serde_json::Value>,
}

fn json_cell(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn read_json(text: &str) -> Result<RawRows, TableError> {
    let parsed: JsonTable =
        serde_json::from_str(text).map_err(|e| TableError::MalformedSource(e.to_string()))?;
    let header = parsed.header.iter().map(json_cell).collect();
    let rows = parsed
        .rows
        .iter()
        .map(|r| r.iter().map(json_cell).collect())
        .collect();
    Ok((header, rows))
}

/// Trims, collapses internal whitespace, lowercases, and disambiguates
/// duplicates with ` (2)`, ` (3)`, ... suffixes. Empty names become
/// `unnamed: <index>`.
pub fn normalize_column_names<S: AsRef<str>>(raw: &[S]) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    for (i, name) in raw.iter().enumerate() {
        let mut base = name
            .as_ref()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        if base.is_empty() {
            base = format!("unnamed: {i}");
        }
        let mut candidate = base.clone();
        let mut n = *seen.get(&base).unwrap_or(&1);
        while out.contains(&candidate) {
            n += 1;
            candidate = format!("{base} ({n})");
        }
        seen.insert(base, n);
        out.push(candidate);
    }
    out
}
