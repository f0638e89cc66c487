use std::cmp::Ordering;
use std::collections::HashMap;

use super::ast::{Accessor, ArithOp, CmpOp, Expr, Function, Keyword, LogicOp, Member, Method};
use super::error::{EvalError, EvalErrorKind};
use super::value::{Row, Series, Value};
use crate::table::{CellValue, ColumnType, Table};

/// Evaluates `expr` against `table`. Pure: the table is only read.
pub fn evaluate(expr: &Expr, table: &Table) -> Result<Value, EvalError> {
    Ok(Evaluator { table }.eval(expr)?.into_value())
}

/// Row subset of the bound table; labels are the source row numbers.
#[derive(Debug, Clone)]
struct Frame<'t> {
    table: &'t Table,
    rows: Vec<usize>,
}

impl<'t> Frame<'t> {
    fn column(&self, name: &str) -> Result<Series, EvalError> {
        let c = self.column_index(name)?;
        Ok(Series {
            name: Some(name.to_string()),
            ctype: self.table.columns()[c].ctype,
            values: self
                .rows
                .iter()
                .map(|&r| self.table.cell(r, c).clone())
                .collect(),
            labels: self.labels(),
        })
    }

    fn column_index(&self, name: &str) -> Result<usize, EvalError> {
        self.table
            .column_index(name)
            .ok_or_else(|| unknown_column(name, self.table))
    }

    fn labels(&self) -> Vec<CellValue> {
        self.rows
            .iter()
            .map(|&r| CellValue::Int(r as i64))
            .collect()
    }

    fn row(&self, position: usize) -> Row {
        let r = self.rows[position];
        Row {
            label: r as i64,
            columns: self
                .table
                .columns()
                .iter()
                .map(|c| c.name.clone())
                .collect(),
            cells: self.table.rows()[r].clone(),
        }
    }
}

#[derive(Debug, Clone)]
enum Val<'t> {
    Scalar(CellValue),
    Series(Series),
    Frame(Frame<'t>),
    List(Vec<CellValue>),
    Pair(i64, i64),
    Row(Row),
}

impl Val<'_> {
    fn into_value(self) -> Value {
        match self {
            Val::Scalar(v) => Value::Scalar(v),
            Val::Series(s) => Value::Vector(s),
            Val::Frame(f) => Value::SubTable(f.table.select_rows(&f.rows)),
            Val::List(l) => Value::List(l),
            Val::Pair(a, b) => Value::Pair(a, b),
            Val::Row(r) => Value::Row(r),
        }
    }

    fn describe(&self) -> String {
        match self {
            Val::Scalar(CellValue::Null) => "missing value".to_string(),
            Val::Scalar(v) => format!("{} scalar", v.ctype().expect("non-null").name()),
            Val::Series(s) => format!("{} vector", s.ctype.name()),
            Val::Frame(_) => "DataFrame".to_string(),
            Val::List(_) => "list".to_string(),
            Val::Pair(..) => "shape tuple".to_string(),
            Val::Row(_) => "row".to_string(),
        }
    }
}

fn unknown_column(name: &str, table: &Table) -> EvalError {
    let available: Vec<String> = table
        .columns()
        .iter()
        .map(|c| format!("'{}'", c.name))
        .collect();
    EvalError::new(
        EvalErrorKind::UnknownColumn,
        format!(
            "column '{name}' not found; available columns: [{}]",
            available.join(", ")
        ),
    )
}

fn unknown_method(what: &str, on: &Val<'_>) -> EvalError {
    EvalError::new(
        EvalErrorKind::UnknownMethod,
        format!("{what} is not available on {}", on.describe()),
    )
}

fn type_name(v: &CellValue) -> &'static str {
    v.ctype().map_or("missing", ColumnType::name)
}

fn group(t: ColumnType) -> u8 {
    match t {
        ColumnType::Int | ColumnType::Float => 0,
        ColumnType::Text => 1,
        ColumnType::Bool => 2,
    }
}

fn check_comparable(l: ColumnType, r: ColumnType, op: &str) -> Result<(), EvalError> {
    if group(l) == group(r) {
        Ok(())
    } else {
        Err(EvalError::type_mismatch(format!(
            "cannot compare {l} with {r} using '{op}'"
        )))
    }
}

/// Total order over two non-null cells of comparable types.
pub(crate) fn order_cells(a: &CellValue, b: &CellValue) -> Ordering {
    match (a, b) {
        (CellValue::Int(x), CellValue::Int(y)) => x.cmp(y),
        (CellValue::Text(x), CellValue::Text(y)) => x.cmp(y),
        (CellValue::Bool(x), CellValue::Bool(y)) => x.cmp(y),
        _ => {
            let (x, y) = (
                a.as_f64().unwrap_or(f64::NAN),
                b.as_f64().unwrap_or(f64::NAN),
            );
            x.partial_cmp(&y).unwrap_or(Ordering::Equal)
        }
    }
}

fn compare_cells(a: &CellValue, op: CmpOp, b: &CellValue) -> bool {
    if a.is_null() || b.is_null() {
        return false;
    }
    let ord = order_cells(a, b);
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

/// Value equality used by `isin` and list comparison; missing never equals.
fn cells_equal(a: &CellValue, b: &CellValue) -> bool {
    match (a, b) {
        (CellValue::Null, _) | (_, CellValue::Null) => false,
        (CellValue::Int(_) | CellValue::Float(_), CellValue::Int(_) | CellValue::Float(_)) => {
            order_cells(a, b) == Ordering::Equal
        }
        _ => a == b,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Int(i64),
    Float(u64),
    Text(String),
    Bool(bool),
    Null,
}

fn key(v: &CellValue) -> Key {
    match v {
        CellValue::Int(i) => Key::Int(*i),
        CellValue::Float(f) => Key::Float(if *f == 0.0 { 0 } else { f.to_bits() }),
        CellValue::Text(s) => Key::Text(s.clone()),
        CellValue::Bool(b) => Key::Bool(*b),
        CellValue::Null => Key::Null,
    }
}

fn distinct(values: &[CellValue]) -> Vec<CellValue> {
    let mut seen = std::collections::HashSet::new();
    values
        .iter()
        .filter(|v| seen.insert(key(v)))
        .cloned()
        .collect()
}

pub(crate) fn cell_truth(v: &CellValue) -> bool {
    match v {
        CellValue::Bool(b) => *b,
        CellValue::Int(i) => *i != 0,
        CellValue::Float(f) => *f != 0.0,
        CellValue::Text(s) => !s.is_empty(),
        CellValue::Null => false,
    }
}

fn ambiguous(n: usize, what: &str) -> EvalError {
    EvalError::new(
        EvalErrorKind::AmbiguousTruth,
        format!("the truth value of a {what} with {n} elements is ambiguous; use .any(), .all() or a scalar comparison"),
    )
}

fn truth(v: &Val<'_>) -> Result<bool, EvalError> {
    match v {
        Val::Scalar(c) => Ok(cell_truth(c)),
        Val::Series(s) => match s.values.len() {
            0 => Ok(false),
            1 => Ok(cell_truth(&s.values[0])),
            n => Err(ambiguous(n, "vector")),
        },
        Val::Row(r) => match r.cells.len() {
            0 => Ok(false),
            1 => Ok(cell_truth(&r.cells[0])),
            n => Err(ambiguous(n, "row")),
        },
        Val::List(items) => Ok(match items.len() {
            0 => false,
            1 => cell_truth(&items[0]),
            _ => true,
        }),
        Val::Pair(..) => Ok(true),
        Val::Frame(f) => Err(EvalError::new(
            EvalErrorKind::AmbiguousTruth,
            format!(
                "the truth value of a DataFrame with {} rows is ambiguous; reduce it to a scalar",
                f.rows.len()
            ),
        )),
    }
}

fn positional(index: i64, len: usize, what: &str) -> Result<usize, EvalError> {
    let resolved = if index < 0 { len as i64 + index } else { index };
    if resolved < 0 || resolved >= len as i64 {
        return Err(EvalError::out_of_range(format!(
            "{what} position {index} out of range for length {len}"
        )));
    }
    Ok(resolved as usize)
}

fn lookup_label(s: &Series, label: &CellValue) -> Result<CellValue, EvalError> {
    let k = key(label);
    s.labels
        .iter()
        .position(|l| key(l) == k)
        .map(|i| s.values[i].clone())
        .ok_or_else(|| EvalError::out_of_range(format!("label {label} not in index")))
}

/// Mask value for each target label; the mask is aligned by label.
fn align_mask(mask: &Series, labels: &[CellValue]) -> Result<Vec<bool>, EvalError> {
    if mask.ctype != ColumnType::Bool {
        return Err(EvalError::type_mismatch(format!(
            "row filter needs a bool vector, got {} vector",
            mask.ctype
        )));
    }
    if mask.labels == labels {
        return Ok(mask
            .values
            .iter()
            .map(|v| matches!(v, CellValue::Bool(true)))
            .collect());
    }
    let by_label: HashMap<Key, bool> = mask
        .labels
        .iter()
        .zip(&mask.values)
        .rev()
        .map(|(l, v)| (key(l), matches!(v, CellValue::Bool(true))))
        .collect();
    labels
        .iter()
        .map(|l| {
            by_label.get(&key(l)).copied().ok_or_else(|| {
                EvalError::type_mismatch(format!(
                    "boolean mask is not aligned with the filtered rows (label {l} missing)"
                ))
            })
        })
        .collect()
}

fn same_labels(a: &Series, b: &Series, op: &str) -> Result<(), EvalError> {
    if a.labels == b.labels {
        Ok(())
    } else {
        Err(EvalError::type_mismatch(format!(
            "'{op}' needs identically-labelled vectors"
        )))
    }
}

fn arith_type(l: ColumnType, op: ArithOp, r: ColumnType) -> Result<ColumnType, EvalError> {
    use ColumnType::*;
    match (l, r) {
        (Int, Int) if op != ArithOp::Div => Ok(Int),
        (Int | Float, Int | Float) => Ok(Float),
        (Text, Text) if op == ArithOp::Add => Ok(Text),
        _ => Err(EvalError::type_mismatch(format!(
            "unsupported operand types for '{}': {l} and {r}",
            op.symbol()
        ))),
    }
}

fn overflow(op: &str) -> EvalError {
    EvalError::type_mismatch(format!("integer overflow in '{op}'"))
}

fn arith_cells(a: &CellValue, op: ArithOp, b: &CellValue) -> Result<CellValue, EvalError> {
    if a.is_null() || b.is_null() {
        return Ok(CellValue::Null);
    }
    if let (CellValue::Text(x), CellValue::Text(y)) = (a, b) {
        return Ok(CellValue::Text(format!("{x}{y}")));
    }
    if op == ArithOp::Div && b.as_f64() == Some(0.0) {
        return Err(EvalError::new(
            EvalErrorKind::DivisionByZero,
            format!("division by zero in {a} / {b}"),
        ));
    }
    if let (CellValue::Int(x), CellValue::Int(y)) = (a, b) {
        let r = match op {
            ArithOp::Add => x.checked_add(*y),
            ArithOp::Sub => x.checked_sub(*y),
            ArithOp::Mul => x.checked_mul(*y),
            ArithOp::Div => return Ok(CellValue::float(*x as f64 / *y as f64)),
        };
        return r.map(CellValue::Int).ok_or_else(|| overflow(op.symbol()));
    }
    let (x, y) = (a.as_f64().expect("numeric"), b.as_f64().expect("numeric"));
    Ok(CellValue::float(match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => x / y,
    }))
}

fn agg_type(method: Method, ctype: ColumnType) -> Result<ColumnType, EvalError> {
    let numeric_only = |out| {
        if ctype == ColumnType::Text {
            Err(EvalError::type_mismatch(format!(
                "{}() needs a numeric vector, got text vector",
                method.name()
            )))
        } else {
            Ok(out)
        }
    };
    match method {
        Method::Sum => numeric_only(if ctype == ColumnType::Float {
            ColumnType::Float
        } else {
            ColumnType::Int
        }),
        Method::Mean => numeric_only(ColumnType::Float),
        Method::Max | Method::Min => Ok(ctype),
        Method::Count | Method::Nunique => Ok(ColumnType::Int),
        other => unreachable!("{} is not an aggregation", other.name()),
    }
}

fn aggregate(s: &Series, method: Method) -> Result<CellValue, EvalError> {
    agg_type(method, s.ctype)?;
    let present: Vec<&CellValue> = s.present().collect();
    Ok(match method {
        Method::Sum => match s.ctype {
            ColumnType::Float => {
                CellValue::float(present.iter().map(|v| v.as_f64().expect("float")).sum())
            }
            ColumnType::Bool => CellValue::Int(
                present
                    .iter()
                    .filter(|v| matches!(v, CellValue::Bool(true)))
                    .count() as i64,
            ),
            _ => {
                let mut acc: i64 = 0;
                for v in &present {
                    if let CellValue::Int(i) = v {
                        acc = acc.checked_add(*i).ok_or_else(|| overflow("sum"))?;
                    }
                }
                CellValue::Int(acc)
            }
        },
        Method::Mean => {
            if present.is_empty() {
                CellValue::Null
            } else {
                let total: f64 = present
                    .iter()
                    .map(|v| match v {
                        CellValue::Bool(b) => f64::from(u8::from(*b)),
                        other => other.as_f64().expect("numeric"),
                    })
                    .sum();
                CellValue::float(total / present.len() as f64)
            }
        }
        Method::Max | Method::Min => {
            let pick = |best: &CellValue, v: &CellValue| {
                let ord = order_cells(v, best);
                if method == Method::Max {
                    ord == Ordering::Greater
                } else {
                    ord == Ordering::Less
                }
            };
            let mut best: Option<&CellValue> = None;
            for v in present {
                if best.is_none_or(|b| pick(b, v)) {
                    best = Some(v);
                }
            }
            best.cloned().unwrap_or(CellValue::Null)
        }
        Method::Count => CellValue::Int(present.len() as i64),
        Method::Nunique => {
            CellValue::Int(distinct(&present.into_iter().cloned().collect::<Vec<_>>()).len() as i64)
        }
        _ => unreachable!(),
    })
}

fn round_half_even(x: f64, ndigits: i64) -> f64 {
    if ndigits == 0 {
        return x.round_ties_even();
    }
    let scale = 10f64.powi(ndigits.min(300) as i32);
    let scaled = x * scale;
    if !scaled.is_finite() {
        return x;
    }
    scaled.round_ties_even() / scale
}

fn float_to_int(f: f64, what: &str) -> Result<i64, EvalError> {
    let t = f.trunc();
    if (-9.223_372_036_854_775e18..9.223_372_036_854_775e18).contains(&t) {
        Ok(t as i64)
    } else {
        Err(EvalError::type_mismatch(format!(
            "{what}: {f} does not fit an integer"
        )))
    }
}

/// Sorts positions stably by the given keys; missing keys go last.
fn sorted_positions(keys: &[CellValue], ascending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| match (keys[a].is_null(), keys[b].is_null()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => {
            let o = order_cells(&keys[a], &keys[b]);
            if ascending {
                o
            } else {
                o.reverse()
            }
        }
    });
    idx
}

fn head_len(n: i64, len: usize) -> usize {
    if n >= 0 {
        (n as usize).min(len)
    } else {
        len.saturating_sub(n.unsigned_abs() as usize)
    }
}

struct Evaluator<'t> {
    table: &'t Table,
}

struct CallArgs<'t> {
    method: &'static str,
    args: Vec<Val<'t>>,
    kwargs: Vec<(Keyword, Val<'t>)>,
}

impl<'t> CallArgs<'t> {
    fn allow(&self, max_positional: usize, keywords: &[Keyword]) -> Result<(), EvalError> {
        if self.args.len() > max_positional {
            return Err(EvalError::type_mismatch(format!(
                "{}() takes at most {max_positional} positional argument(s), got {}",
                self.method,
                self.args.len()
            )));
        }
        if let Some((k, _)) = self.kwargs.iter().find(|(k, _)| !keywords.contains(k)) {
            return Err(EvalError::type_mismatch(format!(
                "{}() got an unexpected keyword argument '{}'",
                self.method,
                k.name()
            )));
        }
        Ok(())
    }

    fn kwarg(&self, k: Keyword) -> Option<&Val<'t>> {
        self.kwargs.iter().find(|(kk, _)| *kk == k).map(|(_, v)| v)
    }

    /// Positional argument `i` or keyword `k` (not both).
    fn arg(&self, i: usize, k: Option<Keyword>) -> Result<Option<&Val<'t>>, EvalError> {
        let pos = self.args.get(i);
        let kw = k.and_then(|k| self.kwarg(k));
        match (pos, kw) {
            (Some(_), Some(_)) => Err(EvalError::type_mismatch(format!(
                "{}() got multiple values for argument '{}'",
                self.method,
                k.expect("keyword").name()
            ))),
            (p, k) => Ok(p.or(k)),
        }
    }

    fn int(&self, i: usize, k: Option<Keyword>, default: i64) -> Result<i64, EvalError> {
        match self.arg(i, k)? {
            None => Ok(default),
            Some(Val::Scalar(CellValue::Int(n))) => Ok(*n),
            Some(other) => Err(EvalError::type_mismatch(format!(
                "{}() expects an int argument, got {}",
                self.method,
                other.describe()
            ))),
        }
    }

    fn bool_kw(&self, k: Keyword, default: bool) -> Result<bool, EvalError> {
        match self.kwarg(k) {
            None => Ok(default),
            Some(Val::Scalar(CellValue::Bool(b))) => Ok(*b),
            Some(other) => Err(EvalError::type_mismatch(format!(
                "{}() expects {}=True or False, got {}",
                self.method,
                k.name(),
                other.describe()
            ))),
        }
    }

    fn text(&self, i: usize, k: Option<Keyword>) -> Result<String, EvalError> {
        match self.arg(i, k)? {
            Some(Val::Scalar(CellValue::Text(s))) => Ok(s.clone()),
            None => Err(EvalError::type_mismatch(format!(
                "{}() missing a string argument",
                self.method
            ))),
            Some(other) => Err(EvalError::type_mismatch(format!(
                "{}() expects a string argument, got {}",
                self.method,
                other.describe()
            ))),
        }
    }
}

impl<'t> Evaluator<'t> {
    fn eval(&self, expr: &Expr) -> Result<Val<'t>, EvalError> {
        match expr {
            Expr::Literal(v) => Ok(Val::Scalar(v.clone())),
            Expr::List(items) => items
                .iter()
                .map(|e| match self.eval(e)? {
                    Val::Scalar(v) => Ok(v),
                    other => Err(EvalError::type_mismatch(format!(
                        "list items must be scalars, got {}",
                        other.describe()
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Val::List),
            Expr::Table => Ok(Val::Frame(Frame {
                table: self.table,
                rows: (0..self.table.row_count()).collect(),
            })),
            Expr::Column { target, name } => self.select(self.eval(target)?, name),
            Expr::Filter { target, mask } => {
                let target = self.eval(target)?;
                match self.eval(mask)? {
                    // `s[(-1)]` means the same as `s[-1]`
                    Val::Scalar(CellValue::Int(i)) => self.index(target, Accessor::Label, i),
                    mask => self.filter(target, mask),
                }
            }
            Expr::Index {
                target,
                accessor,
                index,
            } => {
                let target = self.eval(target)?;
                let i = match self.eval(index)? {
                    Val::Scalar(CellValue::Int(i)) => i,
                    other => {
                        return Err(EvalError::type_mismatch(format!(
                            "index must be an int, got {}",
                            other.describe()
                        )))
                    }
                };
                self.index(target, *accessor, i)
            }
            Expr::Loc {
                target,
                mask,
                column,
            } => {
                let target = self.eval(target)?;
                let Val::Frame(frame) = target else {
                    return Err(unknown_method(".loc", &target));
                };
                let picked = match self.eval(mask)? {
                    Val::Series(m) => {
                        let keep = align_mask(&m, &frame.labels())?;
                        let rows = frame
                            .rows
                            .iter()
                            .zip(keep)
                            .filter(|(_, k)| *k)
                            .map(|(r, _)| *r)
                            .collect();
                        Val::Frame(Frame {
                            table: frame.table,
                            rows,
                        })
                    }
                    Val::Scalar(CellValue::Int(label)) => {
                        let pos = frame
                            .rows
                            .iter()
                            .position(|&r| r as i64 == label)
                            .ok_or_else(|| {
                                EvalError::out_of_range(format!("label {label} not in index"))
                            })?;
                        Val::Row(frame.row(pos))
                    }
                    other => {
                        return Err(EvalError::type_mismatch(format!(
                            ".loc needs a bool vector or an int label, got {}",
                            other.describe()
                        )))
                    }
                };
                match column {
                    Some(c) => self.select(picked, c),
                    None => Ok(picked),
                }
            }
            Expr::Member { target, member } => {
                let target = self.eval(target)?;
                match (member, target) {
                    (Member::Shape, Val::Frame(f)) => {
                        Ok(Val::Pair(f.rows.len() as i64, f.table.col_count() as i64))
                    }
                    (Member::Shape, Val::Series(s)) => {
                        Ok(Val::List(vec![CellValue::Int(s.len() as i64)]))
                    }
                    (Member::Values, Val::Series(s)) => {
                        let labels = (0..s.len() as i64).map(CellValue::Int).collect();
                        Ok(Val::Series(Series { labels, ..s }))
                    }
                    (Member::Shape, other) => Err(unknown_method(".shape", &other)),
                    (Member::Values, other) => Err(unknown_method(".values", &other)),
                }
            }
            Expr::Compare { lhs, op, rhs } => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                compare(l, *op, r)
            }
            Expr::Logic {
                lhs,
                op: op @ (LogicOp::And | LogicOp::Or),
                rhs,
            } => {
                let l = truth(&self.eval(lhs)?)?;
                let decided = match op {
                    LogicOp::And => !l,
                    _ => l,
                };
                if decided {
                    return Ok(Val::Scalar(CellValue::Bool(l)));
                }
                Ok(Val::Scalar(CellValue::Bool(truth(&self.eval(rhs)?)?)))
            }
            Expr::Logic { lhs, op, rhs } => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                bitwise(l, *op, r)
            }
            Expr::Not {
                operand,
                elementwise: false,
            } => Ok(Val::Scalar(CellValue::Bool(!truth(&self.eval(operand)?)?))),
            Expr::Not {
                operand,
                elementwise: true,
            } => match self.eval(operand)? {
                Val::Scalar(CellValue::Bool(b)) => Ok(Val::Scalar(CellValue::Bool(!b))),
                Val::Scalar(CellValue::Null) => Ok(Val::Scalar(CellValue::Null)),
                Val::Series(s) if s.ctype == ColumnType::Bool => {
                    let values = s
                        .values
                        .iter()
                        .map(|v| match v {
                            CellValue::Bool(b) => CellValue::Bool(!b),
                            _ => CellValue::Null,
                        })
                        .collect();
                    Ok(Val::Series(Series { values, ..s }))
                }
                other => Err(EvalError::type_mismatch(format!(
                    "'~' needs bool values, got {}",
                    other.describe()
                ))),
            },
            Expr::Arith { lhs, op, rhs } => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                arith(l, *op, r)
            }
            Expr::Neg(inner) => arith(
                Val::Scalar(CellValue::Int(0)),
                ArithOp::Sub,
                self.eval(inner)?,
            )
            .map_err(|e| {
                if e.kind == EvalErrorKind::TypeMismatch {
                    EvalError::type_mismatch("unary '-' needs numeric values")
                } else {
                    e
                }
            }),
            Expr::MethodCall {
                receiver,
                method,
                args,
                kwargs,
            } => {
                let receiver = self.eval(receiver)?;
                let call = CallArgs {
                    method: method.name(),
                    args: args
                        .iter()
                        .map(|a| self.eval(a))
                        .collect::<Result<_, _>>()?,
                    kwargs: kwargs
                        .iter()
                        .map(|(k, v)| Ok((*k, self.eval(v)?)))
                        .collect::<Result<_, EvalError>>()?,
                };
                self.method(receiver, *method, call)
            }
            Expr::GroupBy {
                target,
                by,
                column,
                agg,
            } => {
                let target = self.eval(target)?;
                let Val::Frame(frame) = target else {
                    return Err(unknown_method("groupby", &target));
                };
                let keys = frame.column(by)?;
                let col = frame.column(column)?;
                let ctype = agg_type(*agg, col.ctype)?;
                let mut groups: Vec<CellValue> =
                    distinct(&keys.present().cloned().collect::<Vec<_>>());
                groups.sort_by(order_cells);
                let mut values = Vec::with_capacity(groups.len());
                for g in &groups {
                    let k = key(g);
                    let members: Vec<CellValue> = keys
                        .values
                        .iter()
                        .zip(&col.values)
                        .filter(|(kv, _)| key(kv) == k)
                        .map(|(_, v)| v.clone())
                        .collect();
                    let part = Series {
                        name: None,
                        ctype: col.ctype,
                        labels: vec![CellValue::Null; members.len()],
                        values: members,
                    };
                    values.push(aggregate(&part, *agg)?);
                }
                Ok(Val::Series(Series {
                    name: Some(column.clone()),
                    ctype,
                    values,
                    labels: groups,
                }))
            }
            Expr::FunctionCall { func, args } => {
                let args: Vec<Val<'t>> = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<_, _>>()?;
                function(*func, args)
            }
        }
    }

    fn select(&self, target: Val<'t>, name: &str) -> Result<Val<'t>, EvalError> {
        match target {
            Val::Frame(f) => f.column(name).map(Val::Series),
            Val::Series(s) => lookup_label(&s, &CellValue::Text(name.to_string())).map(Val::Scalar),
            Val::Row(r) => r
                .columns
                .iter()
                .position(|c| c == name)
                .map(|i| Val::Scalar(r.cells[i].clone()))
                .ok_or_else(|| unknown_column(name, self.table)),
            other => Err(EvalError::type_mismatch(format!(
                "cannot select '{name}' from {}",
                other.describe()
            ))),
        }
    }

    fn filter(&self, target: Val<'t>, mask: Val<'t>) -> Result<Val<'t>, EvalError> {
        let Val::Series(mask) = mask else {
            return Err(EvalError::type_mismatch(format!(
                "row filter needs a bool vector, got {}",
                mask.describe()
            )));
        };
        match target {
            Val::Frame(f) => {
                let keep = align_mask(&mask, &f.labels())?;
                let rows = f
                    .rows
                    .iter()
                    .zip(keep)
                    .filter(|(_, k)| *k)
                    .map(|(r, _)| *r)
                    .collect();
                Ok(Val::Frame(Frame {
                    table: f.table,
                    rows,
                }))
            }
            Val::Series(s) => {
                let keep = align_mask(&mask, &s.labels)?;
                let (mut values, mut labels) = (Vec::new(), Vec::new());
                for ((v, l), k) in s.values.into_iter().zip(s.labels).zip(keep) {
                    if k {
                        values.push(v);
                        labels.push(l);
                    }
                }
                Ok(Val::Series(Series {
                    values,
                    labels,
                    ..s
                }))
            }
            other => Err(EvalError::type_mismatch(format!(
                "cannot filter {}",
                other.describe()
            ))),
        }
    }

    fn index(&self, target: Val<'t>, accessor: Accessor, i: i64) -> Result<Val<'t>, EvalError> {
        match (accessor, target) {
            (Accessor::Label, Val::Frame(f)) => Err(unknown_column(&i.to_string(), f.table)),
            (Accessor::Label, Val::Series(s)) => {
                lookup_label(&s, &CellValue::Int(i)).map(Val::Scalar)
            }
            (Accessor::Label, Val::List(items)) => Ok(Val::Scalar(
                items[positional(i, items.len(), "list")?].clone(),
            )),
            (Accessor::Label, Val::Pair(a, b)) => Ok(Val::Scalar(CellValue::Int(
                [a, b][positional(i, 2, "shape")?],
            ))),
            (Accessor::Label, Val::Row(r)) => Ok(Val::Scalar(
                r.cells[positional(i, r.cells.len(), "row")?].clone(),
            )),
            (Accessor::Label, Val::Scalar(v)) => Err(EvalError::type_mismatch(format!(
                "{} scalar is not subscriptable",
                type_name(&v)
            ))),
            (Accessor::Iloc, Val::Frame(f)) => {
                Ok(Val::Row(f.row(positional(i, f.rows.len(), "row")?)))
            }
            (Accessor::Iloc, Val::Series(s)) => Ok(Val::Scalar(
                s.values[positional(i, s.len(), "vector")?].clone(),
            )),
            (Accessor::Iloc, other) => Err(unknown_method(".iloc", &other)),
        }
    }

    fn method(
        &self,
        receiver: Val<'t>,
        method: Method,
        call: CallArgs<'t>,
    ) -> Result<Val<'t>, EvalError> {
        match receiver {
            Val::Series(s) => series_method(s, method, call),
            Val::Frame(f) => match method {
                Method::SortValues => {
                    call.allow(1, &[Keyword::By, Keyword::Ascending])?;
                    let by = call.text(0, Some(Keyword::By))?;
                    let ascending = call.bool_kw(Keyword::Ascending, true)?;
                    let keys = f.column(&by)?;
                    let rows = sorted_positions(&keys.values, ascending)
                        .into_iter()
                        .map(|p| f.rows[p])
                        .collect();
                    Ok(Val::Frame(Frame {
                        table: f.table,
                        rows,
                    }))
                }
                Method::Head => {
                    call.allow(1, &[Keyword::N])?;
                    let n = call.int(0, Some(Keyword::N), 5)?;
                    let keep = head_len(n, f.rows.len());
                    Ok(Val::Frame(Frame {
                        table: f.table,
                        rows: f.rows[..keep].to_vec(),
                    }))
                }
                other => Err(unknown_method(
                    &format!("{}()", other.name()),
                    &Val::Frame(f),
                )),
            },
            Val::List(items) if method == Method::Tolist => {
                call.allow(0, &[])?;
                Ok(Val::List(items))
            }
            other => Err(unknown_method(&format!("{}()", method.name()), &other)),
        }
    }
}

fn series_method<'t>(s: Series, method: Method, call: CallArgs<'t>) -> Result<Val<'t>, EvalError> {
    match method {
        Method::Sum
        | Method::Mean
        | Method::Max
        | Method::Min
        | Method::Count
        | Method::Nunique => {
            call.allow(0, &[])?;
            aggregate(&s, method).map(Val::Scalar)
        }
        Method::Unique => {
            call.allow(0, &[])?;
            Ok(Val::List(distinct(&s.values)))
        }
        Method::Any | Method::All => {
            call.allow(0, &[])?;
            let mut present = s.present();
            let r = if method == Method::Any {
                present.any(cell_truth)
            } else {
                present.all(cell_truth)
            };
            Ok(Val::Scalar(CellValue::Bool(r)))
        }
        Method::Tolist => {
            call.allow(0, &[])?;
            Ok(Val::List(s.values))
        }
        Method::Abs => {
            call.allow(0, &[])?;
            abs_series(s).map(Val::Series)
        }
        Method::Isin => {
            call.allow(1, &[])?;
            let items = match call.args.first() {
                Some(Val::List(items)) => items.clone(),
                Some(Val::Series(other)) => other.values.clone(),
                Some(other) => {
                    return Err(EvalError::type_mismatch(format!(
                        "isin() needs a list, got {}",
                        other.describe()
                    )))
                }
                None => return Err(EvalError::type_mismatch("isin() missing a list argument")),
            };
            let values = s
                .values
                .iter()
                .map(|v| CellValue::Bool(items.iter().any(|i| cells_equal(v, i))))
                .collect();
            Ok(Val::Series(Series {
                ctype: ColumnType::Bool,
                values,
                ..s
            }))
        }
        Method::Idxmax | Method::Idxmin => {
            call.allow(0, &[])?;
            let mut best: Option<usize> = None;
            for (i, v) in s.values.iter().enumerate() {
                if v.is_null() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        let o = order_cells(v, &s.values[b]);
                        if method == Method::Idxmax {
                            o == Ordering::Greater
                        } else {
                            o == Ordering::Less
                        }
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            best.map(|b| Val::Scalar(s.labels[b].clone()))
                .ok_or_else(|| {
                    EvalError::out_of_range(format!(
                        "{}() of a vector with no values",
                        method.name()
                    ))
                })
        }
        Method::SortValues => {
            call.allow(0, &[Keyword::Ascending])?;
            let ascending = call.bool_kw(Keyword::Ascending, true)?;
            let order = sorted_positions(&s.values, ascending);
            let values = order.iter().map(|&p| s.values[p].clone()).collect();
            let labels = order.iter().map(|&p| s.labels[p].clone()).collect();
            Ok(Val::Series(Series {
                values,
                labels,
                ..s
            }))
        }
        Method::Head => {
            call.allow(1, &[Keyword::N])?;
            let keep = head_len(call.int(0, Some(Keyword::N), 5)?, s.len());
            Ok(Val::Series(Series {
                values: s.values[..keep].to_vec(),
                labels: s.labels[..keep].to_vec(),
                ..s
            }))
        }
        Method::StrContains | Method::StrStartswith | Method::StrLower => {
            if s.ctype != ColumnType::Text {
                return Err(EvalError::type_mismatch(format!(
                    "{}() needs a text vector, got {} vector",
                    method.name(),
                    s.ctype
                )));
            }
            if method == Method::StrLower {
                call.allow(0, &[])?;
                let values = s
                    .values
                    .iter()
                    .map(|v| match v {
                        CellValue::Text(t) => CellValue::Text(t.to_lowercase()),
                        _ => CellValue::Null,
                    })
                    .collect();
                return Ok(Val::Series(Series { values, ..s }));
            }
            call.allow(1, &[])?;
            let needle = call.text(0, None)?;
            let values = s
                .values
                .iter()
                .map(|v| {
                    CellValue::Bool(match v {
                        CellValue::Text(t) if method == Method::StrContains => t.contains(&needle),
                        CellValue::Text(t) => t.starts_with(&needle),
                        _ => false,
                    })
                })
                .collect();
            Ok(Val::Series(Series {
                ctype: ColumnType::Bool,
                values,
                ..s
            }))
        }
    }
}

fn abs_series(s: Series) -> Result<Series, EvalError> {
    if !s.ctype.is_numeric() {
        return Err(EvalError::type_mismatch(format!(
            "abs() needs numeric values, got {} vector",
            s.ctype
        )));
    }
    let values = s.values.iter().map(abs_cell).collect::<Result<_, _>>()?;
    Ok(Series { values, ..s })
}

fn abs_cell(v: &CellValue) -> Result<CellValue, EvalError> {
    match v {
        CellValue::Int(i) => i
            .checked_abs()
            .map(CellValue::Int)
            .ok_or_else(|| overflow("abs")),
        CellValue::Float(f) => Ok(CellValue::Float(f.abs())),
        CellValue::Null => Ok(CellValue::Null),
        other => Err(EvalError::type_mismatch(format!(
            "abs() needs a number, got {}",
            type_name(other)
        ))),
    }
}

fn compare<'t>(l: Val<'t>, op: CmpOp, r: Val<'t>) -> Result<Val<'t>, EvalError> {
    let sym = op.symbol();
    match (l, r) {
        (Val::Scalar(a), Val::Scalar(b)) => {
            if let (Some(ta), Some(tb)) = (a.ctype(), b.ctype()) {
                check_comparable(ta, tb, sym)?;
            }
            Ok(Val::Scalar(CellValue::Bool(compare_cells(&a, op, &b))))
        }
        (Val::Series(s), Val::Scalar(b)) => {
            if let Some(tb) = b.ctype() {
                check_comparable(s.ctype, tb, sym)?;
            }
            let values = s
                .values
                .iter()
                .map(|a| CellValue::Bool(compare_cells(a, op, &b)))
                .collect();
            Ok(Val::Series(Series {
                ctype: ColumnType::Bool,
                values,
                ..s
            }))
        }
        (Val::Scalar(a), Val::Series(s)) => {
            if let Some(ta) = a.ctype() {
                check_comparable(ta, s.ctype, sym)?;
            }
            let values = s
                .values
                .iter()
                .map(|b| CellValue::Bool(compare_cells(&a, op, b)))
                .collect();
            Ok(Val::Series(Series {
                ctype: ColumnType::Bool,
                values,
                ..s
            }))
        }
        (Val::Series(a), Val::Series(b)) => {
            check_comparable(a.ctype, b.ctype, sym)?;
            same_labels(&a, &b, sym)?;
            let values = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| CellValue::Bool(compare_cells(x, op, y)))
                .collect();
            Ok(Val::Series(Series {
                name: None,
                ctype: ColumnType::Bool,
                values,
                labels: a.labels,
            }))
        }
        (Val::List(a), Val::List(b)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
            let eq = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| cells_equal(x, y));
            Ok(Val::Scalar(CellValue::Bool(eq == (op == CmpOp::Eq))))
        }
        (Val::Pair(a1, a2), Val::Pair(b1, b2)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
            let eq = a1 == b1 && a2 == b2;
            Ok(Val::Scalar(CellValue::Bool(eq == (op == CmpOp::Eq))))
        }
        (l, r) => Err(EvalError::type_mismatch(format!(
            "cannot compare {} with {} using '{sym}'",
            l.describe(),
            r.describe()
        ))),
    }
}

fn bool_cell(v: &CellValue, sym: &str) -> Result<bool, EvalError> {
    match v {
        CellValue::Bool(b) => Ok(*b),
        CellValue::Null => Ok(false),
        other => Err(EvalError::type_mismatch(format!(
            "'{sym}' needs bool values, got {}",
            type_name(other)
        ))),
    }
}

fn bool_series(s: &Series, sym: &str) -> Result<(), EvalError> {
    if s.ctype == ColumnType::Bool {
        Ok(())
    } else {
        Err(EvalError::type_mismatch(format!(
            "'{sym}' needs bool values, got {} vector",
            s.ctype
        )))
    }
}

fn bitwise<'t>(l: Val<'t>, op: LogicOp, r: Val<'t>) -> Result<Val<'t>, EvalError> {
    let sym = op.symbol();
    let apply = |a: bool, b: bool| {
        if op == LogicOp::BitAnd {
            a && b
        } else {
            a || b
        }
    };
    match (l, r) {
        (Val::Scalar(a), Val::Scalar(b)) => {
            let (x, y) = (bool_cell(&a, sym)?, bool_cell(&b, sym)?);
            Ok(Val::Scalar(CellValue::Bool(apply(x, y))))
        }
        (Val::Series(s), Val::Scalar(b)) | (Val::Scalar(b), Val::Series(s)) => {
            bool_series(&s, sym)?;
            let y = bool_cell(&b, sym)?;
            let values = s
                .values
                .iter()
                .map(|a| Ok(CellValue::Bool(apply(bool_cell(a, sym)?, y))))
                .collect::<Result<_, EvalError>>()?;
            Ok(Val::Series(Series { values, ..s }))
        }
        (Val::Series(a), Val::Series(b)) => {
            bool_series(&a, sym)?;
            bool_series(&b, sym)?;
            same_labels(&a, &b, sym)?;
            let values = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| {
                    Ok(CellValue::Bool(apply(
                        bool_cell(x, sym)?,
                        bool_cell(y, sym)?,
                    )))
                })
                .collect::<Result<_, EvalError>>()?;
            Ok(Val::Series(Series {
                name: None,
                ctype: ColumnType::Bool,
                values,
                labels: a.labels,
            }))
        }
        (l, r) => Err(EvalError::type_mismatch(format!(
            "'{sym}' needs bool values, got {} and {}",
            l.describe(),
            r.describe()
        ))),
    }
}

fn arith<'t>(l: Val<'t>, op: ArithOp, r: Val<'t>) -> Result<Val<'t>, EvalError> {
    match (l, r) {
        (Val::Scalar(a), Val::Scalar(b)) => {
            if let (Some(ta), Some(tb)) = (a.ctype(), b.ctype()) {
                arith_type(ta, op, tb)?;
            }
            arith_cells(&a, op, &b).map(Val::Scalar)
        }
        (Val::Series(s), Val::Scalar(b)) => {
            let ctype = match b.ctype() {
                Some(tb) => arith_type(s.ctype, op, tb)?,
                None if op == ArithOp::Div && s.ctype.is_numeric() => ColumnType::Float,
                None => s.ctype,
            };
            let values = s
                .values
                .iter()
                .map(|a| arith_cells(a, op, &b))
                .collect::<Result<_, _>>()?;
            Ok(Val::Series(Series { ctype, values, ..s }))
        }
        (Val::Scalar(a), Val::Series(s)) => {
            let ctype = match a.ctype() {
                Some(ta) => arith_type(ta, op, s.ctype)?,
                None if op == ArithOp::Div && s.ctype.is_numeric() => ColumnType::Float,
                None => s.ctype,
            };
            let values = s
                .values
                .iter()
                .map(|b| arith_cells(&a, op, b))
                .collect::<Result<_, _>>()?;
            Ok(Val::Series(Series { ctype, values, ..s }))
        }
        (Val::Series(a), Val::Series(b)) => {
            let ctype = arith_type(a.ctype, op, b.ctype)?;
            same_labels(&a, &b, op.symbol())?;
            let values = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| arith_cells(x, op, y))
                .collect::<Result<_, _>>()?;
            Ok(Val::Series(Series {
                name: None,
                ctype,
                values,
                labels: a.labels,
            }))
        }
        (l, r) => Err(EvalError::type_mismatch(format!(
            "unsupported operand types for '{}': {} and {}",
            op.symbol(),
            l.describe(),
            r.describe()
        ))),
    }
}

fn one_arg<'t>(
    func: Function,
    mut args: Vec<Val<'t>>,
    max: usize,
) -> Result<(Val<'t>, Vec<Val<'t>>), EvalError> {
    if args.is_empty() || args.len() > max {
        let expected = if max == 1 {
            "exactly one argument".to_string()
        } else {
            format!("1 to {max} arguments")
        };
        return Err(EvalError::type_mismatch(format!(
            "{}() takes {expected}, got {}",
            func.name(),
            args.len()
        )));
    }
    let first = args.remove(0);
    Ok((first, args))
}

/// `int(x)`/`float(x)` accept a one-element vector as its element.
fn unwrap_single<'t>(v: Val<'t>, func: Function) -> Result<CellValue, EvalError> {
    match v {
        Val::Scalar(c) => Ok(c),
        Val::Series(s) if s.len() == 1 => Ok(s.values.into_iter().next().expect("one value")),
        other => Err(EvalError::type_mismatch(format!(
            "{}() needs a scalar, got {}",
            func.name(),
            other.describe()
        ))),
    }
}

fn function(func: Function, args: Vec<Val<'_>>) -> Result<Val<'_>, EvalError> {
    match func {
        Function::Len => {
            let (x, _) = one_arg(func, args, 1)?;
            let n = match &x {
                Val::Frame(f) => f.rows.len(),
                Val::Series(s) => s.len(),
                Val::List(l) => l.len(),
                Val::Row(r) => r.cells.len(),
                Val::Pair(..) => 2,
                Val::Scalar(CellValue::Text(t)) => t.chars().count(),
                Val::Scalar(other) => {
                    return Err(EvalError::type_mismatch(format!(
                        "object of type {} has no len()",
                        type_name(other)
                    )))
                }
            };
            Ok(Val::Scalar(CellValue::Int(n as i64)))
        }
        Function::Abs => match one_arg(func, args, 1)?.0 {
            Val::Scalar(c) => abs_cell(&c).map(Val::Scalar),
            Val::Series(s) => abs_series(s).map(Val::Series),
            other => Err(EvalError::type_mismatch(format!(
                "abs() needs a number, got {}",
                other.describe()
            ))),
        },
        Function::Round => {
            let (x, rest) = one_arg(func, args, 2)?;
            let ndigits = match rest.first() {
                None => None,
                Some(Val::Scalar(CellValue::Int(n))) if *n >= 0 => Some(*n),
                Some(Val::Scalar(CellValue::Int(_))) => {
                    return Err(EvalError::type_mismatch(
                        "round() with negative ndigits is not supported",
                    ))
                }
                Some(other) => {
                    return Err(EvalError::type_mismatch(format!(
                        "round() ndigits must be an int, got {}",
                        other.describe()
                    )))
                }
            };
            match x {
                Val::Scalar(c) => match c {
                    CellValue::Int(_) => Ok(Val::Scalar(c)),
                    CellValue::Bool(b) => Ok(Val::Scalar(CellValue::Int(i64::from(b)))),
                    CellValue::Float(f) => match ndigits {
                        None => float_to_int(f.round_ties_even(), "round()")
                            .map(|i| Val::Scalar(CellValue::Int(i))),
                        Some(n) => Ok(Val::Scalar(CellValue::float(round_half_even(f, n)))),
                    },
                    CellValue::Null => {
                        Err(EvalError::type_mismatch("cannot round a missing value"))
                    }
                    CellValue::Text(_) => {
                        Err(EvalError::type_mismatch("round() needs a number, got text"))
                    }
                },
                Val::Series(s) => match s.ctype {
                    ColumnType::Int => Ok(Val::Series(s)),
                    ColumnType::Float => {
                        let n = ndigits.unwrap_or(0);
                        let values = s
                            .values
                            .iter()
                            .map(|v| match v {
                                CellValue::Float(f) => CellValue::float(round_half_even(*f, n)),
                                other => other.clone(),
                            })
                            .collect();
                        Ok(Val::Series(Series { values, ..s }))
                    }
                    other => Err(EvalError::type_mismatch(format!(
                        "round() needs numeric values, got {other} vector"
                    ))),
                },
                other => Err(EvalError::type_mismatch(format!(
                    "round() needs a number, got {}",
                    other.describe()
                ))),
            }
        }
        Function::Str => match one_arg(func, args, 1)?.0 {
            Val::Scalar(c) => Ok(Val::Scalar(CellValue::Text(c.to_display()))),
            other => Err(EvalError::type_mismatch(format!(
                "str() needs a scalar, got {}",
                other.describe()
            ))),
        },
        Function::Int => {
            let c = unwrap_single(one_arg(func, args, 1)?.0, func)?;
            let i = match c {
                CellValue::Int(i) => i,
                CellValue::Bool(b) => i64::from(b),
                CellValue::Float(f) => float_to_int(f, "int()")?,
                CellValue::Text(t) => t.trim().parse::<i64>().map_err(|_| {
                    EvalError::type_mismatch(format!("invalid literal for int(): '{t}'"))
                })?,
                CellValue::Null => {
                    return Err(EvalError::type_mismatch(
                        "cannot convert a missing value to int",
                    ))
                }
            };
            Ok(Val::Scalar(CellValue::Int(i)))
        }
        Function::Float => {
            let c = unwrap_single(one_arg(func, args, 1)?.0, func)?;
            let f = match c {
                CellValue::Int(i) => CellValue::Float(i as f64),
                CellValue::Bool(b) => CellValue::Float(f64::from(u8::from(b))),
                CellValue::Float(f) => CellValue::Float(f),
                CellValue::Text(t) => {
                    let parsed: f64 = t.trim().parse().map_err(|_| {
                        EvalError::type_mismatch(format!(
                            "could not convert string to float: '{t}'"
                        ))
                    })?;
                    CellValue::float(parsed)
                }
                CellValue::Null => CellValue::Null,
            };
            Ok(Val::Scalar(f))
        }
    }
}

/// Host-language truthiness of an evaluation result.
pub fn coerce_truth(value: &Value) -> Result<bool, EvalError> {
    match value {
        Value::Scalar(c) => Ok(cell_truth(c)),
        Value::Vector(s) => match s.values.len() {
            0 => Ok(false),
            1 => Ok(cell_truth(&s.values[0])),
            n => Err(ambiguous(n, "vector")),
        },
        Value::Row(r) => match r.cells.len() {
            0 => Ok(false),
            1 => Ok(cell_truth(&r.cells[0])),
            n => Err(ambiguous(n, "row")),
        },
        Value::List(items) => Ok(match items.len() {
            0 => false,
            1 => cell_truth(&items[0]),
            _ => true,
        }),
        Value::Pair(..) => Ok(true),
        Value::SubTable(t) => Err(EvalError::new(
            EvalErrorKind::AmbiguousTruth,
            format!(
                "the truth value of a DataFrame with {} rows is ambiguous; reduce it to a scalar",
                t.row_count()
            ),
        )),
    }
}
