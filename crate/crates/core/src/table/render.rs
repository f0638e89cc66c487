use serde::{Deserialize, Serialize};

use super::{format_float, CellValue, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderLimits {
    pub max_rows: usize,
    pub max_chars: usize,
}

impl Default for RenderLimits {
    fn default() -> Self {
        RenderLimits {
            max_rows: 50,
            max_chars: 12_000,
        }
    }
}

fn render_cell(cell: &CellValue) -> String {
    match cell {
        CellValue::Null => String::new(),
        CellValue::Float(f) => format_float(*f),
        other => other.to_display(),
    }
}

fn csv_line<I: IntoIterator<Item = String>>(fields: I) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    let bytes = w.into_inner().expect("in-memory flush");
    let mut s = String::from_utf8(bytes).expect("utf-8 input yields utf-8 output");
    s.pop();
    s
}

fn marker(remaining: usize) -> String {
    format!("... ({remaining} more rows)")
}

/// Renders a table as CSV text for prompts: header first, then at most
/// `max_rows` rows, then a `... (<k> more rows)` line if rows were cut.
/// Rows are dropped at row boundaries once `max_chars` would be exceeded;
/// the header is always emitted.
pub fn render_for_prompt(table: &Table, limits: RenderLimits) -> String {
    let header = csv_line(table.columns().iter().map(|c| c.name.clone()));
    let mut out = header;
    out.push('\n');
    let total = table.row_count();
    let reserve = marker(total).len() + 1;
    let mut shown = 0;
    for row in table.rows().iter().take(limits.max_rows) {
        let line = csv_line(row.iter().map(render_cell));
        let remaining_after = total - shown - 1;
        let needed = out.len() + line.len() + 1 + if remaining_after > 0 { reserve } else { 0 };
        if needed > limits.max_chars {
            break;
        }
        out.push_str(&line);
        out.push('\n');
        shown += 1;
    }
    if shown < total {
        out.push_str(&marker(total - shown));
        out.push('\n');
    }
    out
}
