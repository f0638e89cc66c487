use crate::expr::Value;
use crate::table::{infer_column_type, CellValue, ColumnType};

const TOLERANCE: f64 = 1e-6;

/// Flattens a denotation into the items that are compared with the gold
/// answer. Only single-column tables are accepted.
pub fn denotation_items(value: &Value) -> Option<Vec<CellValue>> {
    match value {
        Value::Scalar(c) => Some(vec![c.clone()]),
        Value::Vector(s) => Some(s.values.clone()),
        Value::List(items) => Some(items.clone()),
        Value::Pair(a, b) => Some(vec![CellValue::Int(*a), CellValue::Int(*b)]),
        Value::Row(r) => Some(r.cells.clone()),
        Value::SubTable(t) if t.col_count() == 1 => {
            Some(t.rows().iter().map(|r| r[0].clone()).collect())
        }
        Value::SubTable(_) => None,
    }
}

/// Splits a gold answer into its items; `|` separates multiple values.
pub fn gold_items(gold: &str) -> Vec<String> {
    gold.split('|').map(|s| s.trim().to_string()).collect()
}

fn as_number(s: &str) -> Option<f64> {
    let (ctype, cells) = infer_column_type(&[s.trim()], &[]);
    match (ctype, &cells[0]) {
        (ColumnType::Int | ColumnType::Float, c) => c.as_f64(),
        _ => None,
    }
}

fn item_matches(predicted: &CellValue, gold: &str) -> bool {
    let text = match predicted {
        CellValue::Null => return false,
        CellValue::Int(i) => {
            return as_number(gold).is_some_and(|g| (*i as f64 - g).abs() <= TOLERANCE)
        }
        CellValue::Float(f) => return as_number(gold).is_some_and(|g| (f - g).abs() <= TOLERANCE),
        other => other.to_display(),
    };
    let (p, g) = (text.trim().to_lowercase(), gold.trim().to_lowercase());
    if p == g {
        return true;
    }
    matches!((as_number(&p), as_number(&g)), (Some(a), Some(b)) if (a - b).abs() <= TOLERANCE)
}

/// Denotation match: items compared as multisets after trimming and
/// casefolding, numbers with an absolute tolerance of 1e-6. Missing values
/// never match.
pub fn match_answer(predicted: &Value, gold: &str) -> bool {
    let Some(items) = denotation_items(predicted) else {
        return false;
    };
    let golds = gold_items(gold);
    if items.len() != golds.len() {
        return false;
    }
    let mut used = vec![false; items.len()];
    golds.iter().all(|g| {
        let hit = items
            .iter()
            .enumerate()
            .find(|(i, p)| !used[*i] && item_matches(p, g));
        match hit {
            Some((i, _)) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}
