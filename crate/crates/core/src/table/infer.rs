use super::{CellValue, ColumnType};

/// Cells matching one of these (case-insensitive, after trimming) are missing.
pub const DEFAULT_NULL_TOKENS: &[&str] = &["", "nan", "n/a", "-"];

fn is_null_token(raw: &str, null_tokens: &[&str]) -> bool {
    let t = raw.trim();
    null_tokens.iter().any(|tok| tok.eq_ignore_ascii_case(t))
}

/// `1,234` / `-12,345,678` style: every group after the first has exactly
/// three digits and the first has one to three.
fn strip_thousands(s: &str) -> Option<String> {
    if !s.contains(',') {
        return None;
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", s),
    };
    let (int_part, frac) = match body.split_once('.') {
        Some((i, f)) if !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()) => (i, Some(f)),
        Some(_) => return None,
        None => (body, None),
    };
    let mut groups = int_part.split(',');
    let first = groups.next()?;
    if first.is_empty() || first.len() > 3 || !first.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut out = format!("{sign}{first}");
    for g in groups {
        if g.len() != 3 || !g.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        out.push_str(g);
    }
    if let Some(f) = frac {
        out.push('.');
        out.push_str(f);
    }
    Some(out)
}

fn parse_int(s: &str) -> Option<i64> {
    let t = s.trim();
    t.parse::<i64>()
        .ok()
        .or_else(|| strip_thousands(t)?.parse().ok())
}

fn looks_numeric(t: &str) -> bool {
    // f64::from_str accepts "inf"/"nan"/"infinity"; only digits-bearing
    // spellings count as numbers here.
    t.bytes().any(|b| b.is_ascii_digit())
}

fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    if !looks_numeric(t) {
        return None;
    }
    t.parse::<f64>()
        .ok()
        .or_else(|| strip_thousands(t)?.parse().ok())
}

fn parse_bool(s: &str) -> Option<bool> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("true") {
        Some(true)
    } else if t.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        None
    }
}

/// Parses one raw cell under a fixed column type. Cells that do not fit the
/// type become `Null` (never happens for the type chosen by inference).
pub fn parse_cell(raw: &str, ctype: ColumnType, null_tokens: &[&str]) -> CellValue {
    if is_null_token(raw, null_tokens) {
        return CellValue::Null;
    }
    match ctype {
        ColumnType::Int => parse_int(raw).map_or(CellValue::Null, CellValue::Int),
        ColumnType::Float => parse_float(raw).map_or(CellValue::Null, CellValue::float),
        ColumnType::Bool => parse_bool(raw).map_or(CellValue::Null, CellValue::Bool),
        ColumnType::Text => CellValue::Text(raw.to_string()),
    }
}

/// Picks the narrowest of Int, Float, Bool, Text admitting every non-null
/// cell, then parses all cells under it. All-null columns are Text.
pub fn infer_column_type<S: AsRef<str>>(
    cells: &[S],
    null_tokens: &[&str],
) -> (ColumnType, Vec<CellValue>) {
    let present: Vec<&str> = cells
        .iter()
        .map(AsRef::as_ref)
        .filter(|c| !is_null_token(c, null_tokens))
        .collect();
    let ctype = if present.is_empty() {
        ColumnType::Text
    } else if present.iter().all(|c| parse_int(c).is_some()) {
        ColumnType::Int
    } else if present.iter().all(|c| parse_float(c).is_some()) {
        ColumnType::Float
    } else if present.iter().all(|c| parse_bool(c).is_some()) {
        ColumnType::Bool
    } else {
        ColumnType::Text
    };
    let parsed = cells
        .iter()
        .map(|c| parse_cell(c.as_ref(), ctype, null_tokens))
        .collect();
    (ctype, parsed)
}
