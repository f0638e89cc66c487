use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{ForgeError, Label, TableCatalog};
use crate::table::{load_table_with, unescape_wtq, CorpusProfile, TableFormat};

/// A labelled statement about one table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactRecord {
    pub id: String,
    pub statement: String,
    pub table_ref: String,
    pub label: Label,
}

/// A question about one table with its gold answer (`|` between values).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaRecord {
    pub id: String,
    pub question: String,
    pub table_ref: String,
    pub answer: String,
}

fn read(path: &Path) -> Result<Vec<u8>, ForgeError> {
    std::fs::read(path).map_err(|e| ForgeError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn corpus_error(path: &Path, detail: impl std::fmt::Display) -> ForgeError {
    ForgeError::Corpus(format!("{}: {detail}", path.display()))
}

/// Reads a TabFact statement file, `{table_id: [[statements], [labels], caption]}`,
/// and every table it references from `tables_dir`.
pub fn load_tabfact(
    statements: &Path,
    tables_dir: &Path,
    profile: &CorpusProfile,
) -> Result<(Vec<FactRecord>, TableCatalog), ForgeError> {
    let raw: Json =
        serde_json::from_slice(&read(statements)?).map_err(|e| corpus_error(statements, e))?;
    let Json::Object(map) = raw else {
        return Err(corpus_error(
            statements,
            "expected a JSON object keyed by table id",
        ));
    };
    let mut records = Vec::new();
    let mut catalog = TableCatalog::new();
    for (table_id, item) in map {
        let parts = item.as_array().filter(|a| a.len() >= 2).ok_or_else(|| {
            corpus_error(
                statements,
                format!("entry '{table_id}' is not [statements, labels, ...]"),
            )
        })?;
        let texts = parts[0].as_array().ok_or_else(|| {
            corpus_error(
                statements,
                format!("entry '{table_id}': statements are not a list"),
            )
        })?;
        let labels = parts[1].as_array().ok_or_else(|| {
            corpus_error(
                statements,
                format!("entry '{table_id}': labels are not a list"),
            )
        })?;
        if texts.len() != labels.len() {
            return Err(corpus_error(
                statements,
                format!(
                    "entry '{table_id}': {} statements but {} labels",
                    texts.len(),
                    labels.len()
                ),
            ));
        }
        for (i, (s, l)) in texts.iter().zip(labels).enumerate() {
            let statement = s.as_str().ok_or_else(|| {
                corpus_error(
                    statements,
                    format!("entry '{table_id}': statement {i} is not text"),
                )
            })?;
            let label = match l.as_i64() {
                Some(1) => Label::Entailed,
                Some(0) => Label::Refuted,
                _ => {
                    return Err(corpus_error(
                        statements,
                        format!("entry '{table_id}': label {i} is not 0 or 1"),
                    ))
                }
            };
            records.push(FactRecord {
                id: format!("{table_id}#{i}"),
                statement: statement.to_string(),
                table_ref: table_id.clone(),
                label,
            });
        }
        let path = tables_dir.join(&table_id);
        let table = load_table_with(&read(&path)?, TableFormat::Csv, profile, &table_id)
            .map_err(|e| corpus_error(&path, e))?;
        catalog.insert(table_id, table);
    }
    Ok((records, catalog))
}

/// Picks the on-disk file for a WikiTableQuestions context: the `.tsv`
/// sibling when present (cleaner escaping), else the file itself.
fn wtq_table_path(root: &Path, context: &str) -> (PathBuf, TableFormat) {
    let path = root.join(context);
    let tsv = path.with_extension("tsv");
    if tsv.is_file() {
        return (tsv, TableFormat::WtqTsv);
    }
    let format = TableFormat::from_extension(&path).unwrap_or(TableFormat::Csv);
    (path, format)
}

/// Reads a WikiTableQuestions example file (`id utterance context
/// targetValue`, tab separated) and the tables under `root`.
pub fn load_wtq(
    examples: &Path,
    root: &Path,
    profile: &CorpusProfile,
) -> Result<(Vec<QaRecord>, TableCatalog), ForgeError> {
    let bytes = read(examples)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let header = reader
        .headers()
        .map_err(|e| corpus_error(examples, e))?
        .clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| corpus_error(examples, format!("missing column '{name}'")))
    };
    let (id_c, q_c, ctx_c, ans_c) = (
        col("id")?,
        col("utterance")?,
        col("context")?,
        col("targetValue")?,
    );
    let mut records = Vec::new();
    let mut catalog = TableCatalog::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| corpus_error(examples, e))?;
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| corpus_error(examples, format!("line {} is missing a field", n + 2)))
        };
        let context = field(ctx_c)?.to_string();
        let answer = field(ans_c)?
            .split('|')
            .map(unescape_wtq)
            .collect::<Vec<_>>()
            .join("|");
        records.push(QaRecord {
            id: field(id_c)?.to_string(),
            question: unescape_wtq(field(q_c)?),
            table_ref: context.clone(),
            answer,
        });
        if catalog.get(&context).is_none() {
            let (path, format) = wtq_table_path(root, &context);
            let table = load_table_with(&read(&path)?, format, profile, &context)
                .map_err(|e| corpus_error(&path, e))?;
            catalog.insert(context, table);
        }
    }
    Ok((records, catalog))
}
