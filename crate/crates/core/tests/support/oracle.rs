//! Random expressions over random tables, each paired with the result a
//! brute-force row-by-row reading of the grammar document predicts.
//!
//! Nothing here calls into the evaluator; the engine is only consulted by
//! the tests that compare against these predictions.

use std::cmp::Ordering;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabexec::expr::{Series, Value};
use tabexec::{CellValue, ColumnType, Table};

pub const TM: &str = "TypeMismatch";
pub const UC: &str = "UnknownColumn";
pub const IR: &str = "IndexOutOfRange";
pub const DZ: &str = "DivisionByZero";
pub const AT: &str = "AmbiguousTruth";
pub const UM: &str = "UnknownMethod";

#[derive(Debug, Clone, PartialEq)]
pub enum C {
    N,
    I(i64),
    F(f64),
    T(String),
    B(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    I,
    F,
    T,
    B,
}

impl C {
    fn ty(&self) -> Option<Ty> {
        match self {
            C::N => None,
            C::I(_) => Some(Ty::I),
            C::F(_) => Some(Ty::F),
            C::T(_) => Some(Ty::T),
            C::B(_) => Some(Ty::B),
        }
    }

    fn num(&self) -> Option<f64> {
        match self {
            C::I(i) => Some(*i as f64),
            C::F(f) => Some(*f),
            _ => None,
        }
    }

    fn truthy(&self) -> bool {
        match self {
            C::N => false,
            C::I(i) => *i != 0,
            C::F(f) => *f != 0.0,
            C::T(s) => !s.is_empty(),
            C::B(b) => *b,
        }
    }

    fn lit(&self) -> String {
        match self {
            C::I(i) if *i < 0 => format!("({i})"),
            C::I(i) => i.to_string(),
            C::F(f) if *f < 0.0 => format!("({f:?})"),
            C::F(f) => format!("{f:?}"),
            C::T(s) => format!("'{s}'"),
            C::B(true) => "True".into(),
            C::B(false) => "False".into(),
            C::N => unreachable!("no missing literal"),
        }
    }
}

fn fl(x: f64) -> C {
    if x.is_finite() {
        C::F(x)
    } else {
        C::N
    }
}

fn numeric_group(t: Ty) -> u8 {
    match t {
        Ty::I | Ty::F => 0,
        Ty::T => 1,
        Ty::B => 2,
    }
}

/// Order of two present cells of comparable types.
fn order(a: &C, b: &C) -> Ordering {
    match (a, b) {
        (C::I(x), C::I(y)) => x.cmp(y),
        (C::T(x), C::T(y)) => x.cmp(y),
        (C::B(x), C::B(y)) => x.cmp(y),
        _ => a.num().unwrap().partial_cmp(&b.num().unwrap()).unwrap(),
    }
}

/// Identity used for grouping, distinct values and label lookup.
fn same_key(a: &C, b: &C) -> bool {
    match (a, b) {
        (C::F(x), C::F(y)) => x == y,
        _ => a == b,
    }
}

#[derive(Debug, Clone, Copy)]
enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    const ALL: [Cmp; 6] = [Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge];

    fn sym(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    fn holds(self, a: &C, b: &C) -> bool {
        if *a == C::N || *b == C::N {
            return false;
        }
        let o = order(a, b);
        match self {
            Cmp::Eq => o == Ordering::Equal,
            Cmp::Ne => o != Ordering::Equal,
            Cmp::Lt => o == Ordering::Less,
            Cmp::Le => o != Ordering::Greater,
            Cmp::Gt => o == Ordering::Greater,
            Cmp::Ge => o != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    fn sym(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
        }
    }
}

fn arith_ty(l: Ty, op: Op, r: Ty) -> Result<Ty, &'static str> {
    match (l, r) {
        (Ty::I, Ty::I) if op != Op::Div => Ok(Ty::I),
        (Ty::I | Ty::F, Ty::I | Ty::F) => Ok(Ty::F),
        (Ty::T, Ty::T) if op == Op::Add => Ok(Ty::T),
        _ => Err(TM),
    }
}

fn arith_cell(a: &C, op: Op, b: &C) -> Result<C, &'static str> {
    if *a == C::N || *b == C::N {
        return Ok(C::N);
    }
    if let (C::T(x), C::T(y)) = (a, b) {
        return Ok(C::T(format!("{x}{y}")));
    }
    if op == Op::Div && b.num() == Some(0.0) {
        return Err(DZ);
    }
    if let (C::I(x), C::I(y)) = (a, b) {
        return Ok(match op {
            Op::Add => C::I(x + y),
            Op::Sub => C::I(x - y),
            Op::Mul => C::I(x * y),
            Op::Div => fl(*x as f64 / *y as f64),
        });
    }
    let (x, y) = (a.num().unwrap(), b.num().unwrap());
    Ok(fl(match op {
        Op::Add => x + y,
        Op::Sub => x - y,
        Op::Mul => x * y,
        Op::Div => x / y,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Agg {
    Sum,
    Mean,
    Max,
    Min,
    Count,
    Nunique,
}

impl Agg {
    const ALL: [Agg; 6] = [
        Agg::Sum,
        Agg::Mean,
        Agg::Max,
        Agg::Min,
        Agg::Count,
        Agg::Nunique,
    ];

    fn name(self) -> &'static str {
        match self {
            Agg::Sum => "sum",
            Agg::Mean => "mean",
            Agg::Max => "max",
            Agg::Min => "min",
            Agg::Count => "count",
            Agg::Nunique => "nunique",
        }
    }

    fn out_ty(self, t: Ty) -> Result<Ty, &'static str> {
        match self {
            Agg::Sum | Agg::Mean if t == Ty::T => Err(TM),
            Agg::Sum if t == Ty::F => Ok(Ty::F),
            Agg::Sum => Ok(Ty::I),
            Agg::Mean => Ok(Ty::F),
            Agg::Max | Agg::Min => Ok(t),
            Agg::Count | Agg::Nunique => Ok(Ty::I),
        }
    }

    fn apply(self, t: Ty, vals: &[C]) -> Result<C, &'static str> {
        self.out_ty(t)?;
        let present: Vec<&C> = vals.iter().filter(|v| **v != C::N).collect();
        Ok(match self {
            Agg::Sum => match t {
                Ty::F => fl(present.iter().fold(0.0, |acc, v| acc + v.num().unwrap())),
                Ty::B => C::I(present.iter().filter(|v| ***v == C::B(true)).count() as i64),
                _ => C::I(
                    present
                        .iter()
                        .map(|v| if let C::I(i) = v { *i } else { 0 })
                        .sum(),
                ),
            },
            Agg::Mean if present.is_empty() => C::N,
            Agg::Mean => {
                let total: f64 = present
                    .iter()
                    .map(|v| {
                        if let C::B(b) = v {
                            f64::from(u8::from(*b))
                        } else {
                            v.num().unwrap()
                        }
                    })
                    .sum();
                fl(total / present.len() as f64)
            }
            Agg::Max | Agg::Min => {
                let mut best: Option<&C> = None;
                for v in present {
                    let better = match best {
                        None => true,
                        Some(b) => {
                            order(v, b)
                                == if self == Agg::Max {
                                    Ordering::Greater
                                } else {
                                    Ordering::Less
                                }
                        }
                    };
                    if better {
                        best = Some(v);
                    }
                }
                best.cloned().unwrap_or(C::N)
            }
            Agg::Count => C::I(present.len() as i64),
            Agg::Nunique => {
                C::I(distinct(&present.into_iter().cloned().collect::<Vec<_>>()).len() as i64)
            }
        })
    }
}

fn distinct(vals: &[C]) -> Vec<C> {
    let mut out: Vec<C> = Vec::new();
    for v in vals {
        if !out.iter().any(|o| same_key(o, v)) {
            out.push(v.clone());
        }
    }
    out
}

/// Predicted result of an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum RV {
    S(C),
    V {
        ty: Ty,
        labels: Vec<C>,
        vals: Vec<C>,
    },
    Frame(Vec<usize>),
    Row(usize),
    L(Vec<C>),
    P(i64, i64),
}

pub type Res = Result<RV, &'static str>;

fn truth(v: &RV) -> Result<bool, &'static str> {
    match v {
        RV::S(c) => Ok(c.truthy()),
        RV::V { vals, .. } => match vals.len() {
            0 => Ok(false),
            1 => Ok(vals[0].truthy()),
            _ => Err(AT),
        },
        RV::Row(_) => Err(AT),
        RV::L(items) => Ok(match items.len() {
            0 => false,
            1 => items[0].truthy(),
            _ => true,
        }),
        RV::P(..) => Ok(true),
        RV::Frame(_) => Err(AT),
    }
}

fn position(index: i64, len: usize) -> Result<usize, &'static str> {
    let r = if index < 0 { len as i64 + index } else { index };
    if r < 0 || r >= len as i64 {
        Err(IR)
    } else {
        Ok(r as usize)
    }
}

fn head_len(n: i64, len: usize) -> usize {
    if n >= 0 {
        (n as usize).min(len)
    } else {
        len.saturating_sub(n.unsigned_abs() as usize)
    }
}

/// Stable sort with missing values last; ties keep their order either way.
fn sort_order(keys: &[C], ascending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| match (&keys[a], &keys[b]) {
        (C::N, C::N) => Ordering::Equal,
        (C::N, _) => Ordering::Greater,
        (_, C::N) => Ordering::Less,
        (x, y) if ascending => order(x, y),
        (x, y) => order(y, x),
    });
    idx
}

fn round_even(x: f64, n: i64) -> f64 {
    if n == 0 {
        return x.round_ties_even();
    }
    let scale = 10f64.powi(n as i32);
    (x * scale).round_ties_even() / scale
}

pub struct RefTable {
    pub names: Vec<String>,
    pub tys: Vec<Ty>,
    pub rows: Vec<Vec<C>>,
}

impl RefTable {
    fn col(&self, name: &str) -> Result<usize, &'static str> {
        self.names.iter().position(|n| n == name).ok_or(UC)
    }

    fn column(&self, rows: &[usize], name: &str) -> Res {
        let c = self.col(name)?;
        Ok(RV::V {
            ty: self.tys[c],
            labels: rows.iter().map(|&r| C::I(r as i64)).collect(),
            vals: rows.iter().map(|&r| self.rows[r][c].clone()).collect(),
        })
    }

    pub fn to_table(&self) -> Table {
        let columns = self
            .names
            .iter()
            .zip(&self.tys)
            .map(|(n, t)| {
                let ct = match t {
                    Ty::I => ColumnType::Int,
                    Ty::F => ColumnType::Float,
                    Ty::T => ColumnType::Text,
                    Ty::B => ColumnType::Bool,
                };
                (n.clone(), ct)
            })
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(to_cell).collect())
            .collect();
        Table::from_typed("random", columns, rows).unwrap()
    }
}

fn to_cell(c: &C) -> CellValue {
    match c {
        C::N => CellValue::Null,
        C::I(i) => CellValue::Int(*i),
        C::F(f) => CellValue::Float(*f),
        C::T(s) => CellValue::Text(s.clone()),
        C::B(b) => CellValue::Bool(*b),
    }
}

fn from_cell(c: &CellValue) -> C {
    match c {
        CellValue::Null => C::N,
        CellValue::Int(i) => C::I(*i),
        CellValue::Float(f) => C::F(*f),
        CellValue::Text(s) => C::T(s.clone()),
        CellValue::Bool(b) => C::B(*b),
    }
}

fn close(a: &C, b: &C) -> bool {
    match (a, b) {
        (C::F(x), C::F(y)) => (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())),
        _ => a == b,
    }
}

fn all_close(a: &[C], b: &[CellValue]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(x, &from_cell(y)))
}

fn ty_matches(t: Ty, ct: ColumnType) -> bool {
    matches!(
        (t, ct),
        (Ty::I, ColumnType::Int)
            | (Ty::F, ColumnType::Float)
            | (Ty::T, ColumnType::Text)
            | (Ty::B, ColumnType::Bool)
    )
}

/// Whether the engine's value is the predicted one.
pub fn agrees(actual: &Value, expected: &RV, t: &RefTable) -> bool {
    match (actual, expected) {
        (Value::Scalar(a), RV::S(e)) => close(e, &from_cell(a)),
        (
            Value::Vector(Series {
                ctype,
                values,
                labels,
                ..
            }),
            RV::V {
                ty,
                labels: el,
                vals,
            },
        ) => ty_matches(*ty, *ctype) && all_close(el, labels) && all_close(vals, values),
        (Value::SubTable(table), RV::Frame(rows)) => {
            table.row_count() == rows.len()
                && table.col_count() == t.names.len()
                && rows
                    .iter()
                    .enumerate()
                    .all(|(i, &r)| all_close(&t.rows[r], &table.rows()[i]))
        }
        (Value::Row(row), RV::Row(r)) => {
            row.label == *r as i64 && all_close(&t.rows[*r], &row.cells)
        }
        (Value::List(items), RV::L(e)) => all_close(e, items),
        (Value::Pair(a, b), RV::P(x, y)) => a == x && b == y,
        _ => false,
    }
}

const NAMES: &[&str] = &[
    "a",
    "b",
    "name",
    "score",
    "team",
    "total pts",
    "rank",
    "city",
];
const WORDS: &[&str] = &["ann", "bob", "cid", "Dee", "eve", "x y", "bob ", ""];

pub fn random_table(rng: &mut impl Rng) -> RefTable {
    let n_rows = rng.random_range(0..=8);
    let n_cols = rng.random_range(1..=5);
    let mut names: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
    names.sort_by_key(|_| rng.random::<u32>());
    names.truncate(n_cols);
    let tys: Vec<Ty> = (0..n_cols)
        .map(|_| {
            *[Ty::I, Ty::I, Ty::F, Ty::T, Ty::T, Ty::B]
                .choose(rng)
                .unwrap()
        })
        .collect();
    let rows = (0..n_rows)
        .map(|_| {
            tys.iter()
                .map(|t| {
                    if rng.random_bool(0.15) {
                        return C::N;
                    }
                    match t {
                        Ty::I => C::I(rng.random_range(-3..=20)),
                        Ty::F => C::F(rng.random_range(-4..=40) as f64 / 2.0),
                        Ty::T => C::T(WORDS.choose(rng).unwrap().to_string()),
                        Ty::B => C::B(rng.random()),
                    }
                })
                .collect()
        })
        .collect();
    RefTable { names, tys, rows }
}

pub struct Case {
    pub src: String,
    pub expected: Res,
}

type E = (String, Res);

pub struct Gen<'a> {
    rng: ChaCha8Rng,
    t: &'a RefTable,
}

impl<'a> Gen<'a> {
    pub fn new(seed: u64, t: &'a RefTable) -> Gen<'a> {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            t,
        }
    }

    fn all_rows(&self) -> Vec<usize> {
        (0..self.t.rows.len()).collect()
    }

    fn pick_name(&mut self) -> String {
        if self.t.names.is_empty() || self.rng.random_bool(0.05) {
            return "zz".into();
        }
        self.t.names.choose(&mut self.rng).unwrap().clone()
    }

    /// A column name, preferring columns of type `want`.
    fn pick_typed(&mut self, want: Ty) -> String {
        let matching: Vec<&String> = self
            .t
            .names
            .iter()
            .zip(&self.t.tys)
            .filter(|(_, t)| **t == want)
            .map(|(n, _)| n)
            .collect();
        if !matching.is_empty() && self.rng.random_bool(0.8) {
            return matching.choose(&mut self.rng).unwrap().to_string();
        }
        self.pick_name()
    }

    fn literal_like(&mut self, t: Option<Ty>) -> C {
        let t = match t {
            Some(t) if self.rng.random_bool(0.85) => t,
            _ => *[Ty::I, Ty::F, Ty::T, Ty::B].choose(&mut self.rng).unwrap(),
        };
        match t {
            Ty::I => C::I(self.rng.random_range(-2..=20)),
            Ty::F => C::F(self.rng.random_range(-2..=40) as f64 / 2.0),
            Ty::T => C::T(WORDS.choose(&mut self.rng).unwrap().to_string()),
            Ty::B => C::B(self.rng.random()),
        }
    }

    fn col_ty(&self, name: &str) -> Option<Ty> {
        self.t.col(name).ok().map(|c| self.t.tys[c])
    }

    fn cmp(&mut self) -> Cmp {
        *Cmp::ALL.choose(&mut self.rng).unwrap()
    }

    fn op(&mut self) -> Op {
        *[Op::Add, Op::Sub, Op::Mul, Op::Div]
            .choose(&mut self.rng)
            .unwrap()
    }

    fn agg(&mut self) -> Agg {
        *Agg::ALL.choose(&mut self.rng).unwrap()
    }

    pub fn case(&mut self) -> Case {
        let roll = self.rng.random_range(0..100);
        let (src, expected) = match roll {
            0..=29 => self.scalar(3),
            30..=64 => self.boolean(3),
            65..=79 => self.vector(2),
            80..=89 => self.frame(2),
            90..=94 => self.list(2),
            _ => self.row(2),
        };
        Case { src, expected }
    }

    fn frame(&mut self, d: u32) -> E {
        let k = if d == 0 {
            0
        } else {
            self.rng.random_range(0..6)
        };
        match k {
            1 | 4 => {
                let (fs, fr) = self.frame(d - 1);
                let (ms, mr) = self.mask(d - 1);
                (format!("{fs}[{ms}]"), filter_frame(fr, mr))
            }
            2 => {
                let (fs, fr) = self.frame(d - 1);
                let name = self.pick_name();
                let asc = self.rng.random_bool(0.5);
                let src = match self.rng.random_range(0..3) {
                    0 => format!("{fs}.sort_values('{name}')"),
                    1 => format!(
                        "{fs}.sort_values(by='{name}', ascending={})",
                        if asc { "True" } else { "False" }
                    ),
                    _ => format!(
                        "{fs}.sort_values('{name}', ascending={})",
                        if asc { "True" } else { "False" }
                    ),
                };
                let asc = asc || src.ends_with("')");
                let res = fr.and_then(|f| {
                    let RV::Frame(rows) = f else { unreachable!() };
                    let c = self.t.col(&name)?;
                    let keys: Vec<C> = rows.iter().map(|&r| self.t.rows[r][c].clone()).collect();
                    Ok(RV::Frame(
                        sort_order(&keys, asc)
                            .into_iter()
                            .map(|p| rows[p])
                            .collect(),
                    ))
                });
                (src, res)
            }
            3 => {
                let (fs, fr) = self.frame(d - 1);
                let (src, n) = if self.rng.random_bool(0.2) {
                    (format!("{fs}.head()"), 5)
                } else {
                    let n = self.rng.random_range(-2..=6);
                    (format!("{fs}.head({})", C::I(n).lit()), n)
                };
                let res = fr.map(|f| {
                    let RV::Frame(rows) = f else { unreachable!() };
                    let keep = head_len(n, rows.len());
                    RV::Frame(rows[..keep].to_vec())
                });
                (src, res)
            }
            5 => {
                let (ms, mr) = self.mask(d - 1);
                (
                    format!("df.loc[{ms}]"),
                    filter_frame(Ok(RV::Frame(self.all_rows())), mr),
                )
            }
            _ => ("df".into(), Ok(RV::Frame(self.all_rows()))),
        }
    }

    /// Bool vector over every row of `df` (or an error).
    fn mask(&mut self, d: u32) -> E {
        let k = self.rng.random_range(0..if d == 0 { 6 } else { 9 });
        match k {
            0 | 1 => {
                let name = self.pick_name();
                let lit = self.literal_like(self.col_ty(&name));
                let op = self.cmp();
                let res = self
                    .t
                    .column(&self.all_rows(), &name)
                    .and_then(|v| cmp_vec_scalar(v, op, &lit));
                (format!("df['{name}'] {} {}", op.sym(), lit.lit()), res)
            }
            2 => {
                let method = if self.rng.random_bool(0.5) {
                    "contains"
                } else {
                    "startswith"
                };
                let name = self.pick_typed(Ty::T);
                let needle = WORDS
                    .choose(&mut self.rng)
                    .unwrap()
                    .chars()
                    .take(self.rng.random_range(0..=3))
                    .collect::<String>();
                let res = self.t.column(&self.all_rows(), &name).and_then(|v| {
                    let RV::V { ty, labels, vals } = v else {
                        unreachable!()
                    };
                    if ty != Ty::T {
                        return Err(TM);
                    }
                    let vals = vals
                        .iter()
                        .map(|c| {
                            C::B(match c {
                                C::T(s) if method == "contains" => s.contains(&needle),
                                C::T(s) => s.starts_with(&needle),
                                _ => false,
                            })
                        })
                        .collect();
                    Ok(RV::V {
                        ty: Ty::B,
                        labels,
                        vals,
                    })
                });
                (format!("df['{name}'].str.{method}('{needle}')"), res)
            }
            3 => {
                let name = self.pick_typed(Ty::T);
                let word = WORDS.choose(&mut self.rng).unwrap().to_lowercase();
                let res = self.t.column(&self.all_rows(), &name).and_then(|v| {
                    let RV::V { ty, labels, vals } = v else {
                        unreachable!()
                    };
                    if ty != Ty::T {
                        return Err(TM);
                    }
                    let lowered = vals
                        .iter()
                        .map(|c| {
                            if let C::T(s) = c {
                                C::T(s.to_lowercase())
                            } else {
                                C::N
                            }
                        })
                        .collect();
                    cmp_vec_scalar(
                        RV::V {
                            ty,
                            labels,
                            vals: lowered,
                        },
                        Cmp::Eq,
                        &C::T(word.clone()),
                    )
                });
                (format!("df['{name}'].str.lower() == '{word}'"), res)
            }
            4 => {
                let name = self.pick_name();
                let ty = self.col_ty(&name);
                let items: Vec<C> = (0..self.rng.random_range(0..=3))
                    .map(|_| self.literal_like(ty))
                    .map(|c| match c {
                        C::I(i) => C::I(i.abs()),
                        C::F(f) => C::F(f.abs()),
                        other => other,
                    })
                    .collect();
                let res = self.t.column(&self.all_rows(), &name).map(|v| {
                    let RV::V { labels, vals, .. } = v else {
                        unreachable!()
                    };
                    let vals = vals
                        .iter()
                        .map(|c| C::B(items.iter().any(|i| loosely_equal(c, i))))
                        .collect();
                    RV::V {
                        ty: Ty::B,
                        labels,
                        vals,
                    }
                });
                let list = items.iter().map(C::lit).collect::<Vec<_>>().join(", ");
                (format!("df['{name}'].isin([{list}])"), res)
            }
            5 => {
                let name = self.pick_typed(Ty::B);
                (
                    format!("df['{name}']"),
                    self.t.column(&self.all_rows(), &name),
                )
            }
            6 => {
                let (ls, lr) = self.mask(d - 1);
                let (rs, rr) = self.mask(d - 1);
                let and = self.rng.random_bool(0.5);
                let res = lr.and_then(|l| rr.and_then(|r| bitwise(l, and, r)));
                (
                    format!("({ls}) {} ({rs})", if and { "&" } else { "|" }),
                    res,
                )
            }
            7 => {
                let (ms, mr) = self.mask(d - 1);
                let res = mr.and_then(|m| {
                    let RV::V { ty, labels, vals } = m else {
                        return Err(TM);
                    };
                    if ty != Ty::B {
                        return Err(TM);
                    }
                    let vals = vals
                        .iter()
                        .map(|c| if let C::B(b) = c { C::B(!b) } else { C::N })
                        .collect();
                    Ok(RV::V { ty, labels, vals })
                });
                (format!("~({ms})"), res)
            }
            _ => {
                let l = self.pick_name();
                let r = self.pick_name();
                let op = self.cmp();
                let rows = self.all_rows();
                let res = self.t.column(&rows, &l).and_then(|lv| {
                    let rv = self.t.column(&rows, &r)?;
                    let (
                        RV::V {
                            ty: lt,
                            labels,
                            vals: a,
                        },
                        RV::V {
                            ty: rt, vals: b, ..
                        },
                    ) = (lv, rv)
                    else {
                        unreachable!()
                    };
                    if numeric_group(lt) != numeric_group(rt) {
                        return Err(TM);
                    }
                    let vals = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| C::B(op.holds(x, y)))
                        .collect();
                    Ok(RV::V {
                        ty: Ty::B,
                        labels,
                        vals,
                    })
                });
                (format!("df['{l}'] {} df['{r}']", op.sym()), res)
            }
        }
    }

    /// Column of a (possibly filtered or sorted) frame.
    fn column_of_frame(&mut self, d: u32) -> E {
        let (fs, fr) = self.frame(d);
        let name = self.pick_name();
        let res = fr.and_then(|f| {
            let RV::Frame(rows) = f else { unreachable!() };
            self.t.column(&rows, &name)
        });
        (format!("{fs}['{name}']"), res)
    }

    fn vector(&mut self, d: u32) -> E {
        let k = if d == 0 {
            0
        } else {
            self.rng.random_range(0..10)
        };
        match k {
            1 => {
                let (vs, vr) = self.column_of_frame(d - 1);
                let op = self.op();
                let ty = vr.as_ref().ok().and_then(|v| {
                    if let RV::V { ty, .. } = v {
                        Some(*ty)
                    } else {
                        None
                    }
                });
                let lit = self.literal_like(ty);
                let res = vr.and_then(|v| {
                    let RV::V { ty, labels, vals } = v else {
                        unreachable!()
                    };
                    let out = arith_ty(ty, op, lit.ty().unwrap())?;
                    let vals = vals
                        .iter()
                        .map(|c| arith_cell(c, op, &lit))
                        .collect::<Result<_, _>>()?;
                    Ok(RV::V {
                        ty: out,
                        labels,
                        vals,
                    })
                });
                (format!("({vs} {} {})", op.sym(), lit.lit()), res)
            }
            2 => {
                let (fs, fr) = self.frame(d - 1);
                let by = self.pick_name();
                let col = self.pick_name();
                let agg = self.agg();
                let res = fr.and_then(|f| {
                    let RV::Frame(rows) = f else { unreachable!() };
                    let kc = self.t.col(&by)?;
                    let vc = self.t.col(&col)?;
                    let out = agg.out_ty(self.t.tys[vc])?;
                    let keys: Vec<C> = rows
                        .iter()
                        .map(|&r| self.t.rows[r][kc].clone())
                        .filter(|c| *c != C::N)
                        .collect();
                    let mut groups = distinct(&keys);
                    groups.sort_by(order);
                    let vals = groups
                        .iter()
                        .map(|g| {
                            let members: Vec<C> = rows
                                .iter()
                                .filter(|&&r| same_key(&self.t.rows[r][kc], g))
                                .map(|&r| self.t.rows[r][vc].clone())
                                .collect();
                            agg.apply(self.t.tys[vc], &members)
                        })
                        .collect::<Result<_, _>>()?;
                    Ok(RV::V {
                        ty: out,
                        labels: groups,
                        vals,
                    })
                });
                (
                    format!("{fs}.groupby('{by}')['{col}'].{}()", agg.name()),
                    res,
                )
            }
            3 => {
                let (vs, vr) = self.vector(d - 1);
                let asc = self.rng.random_bool(0.5);
                let res = vr.and_then(|v| {
                    let RV::V { ty, labels, vals } = v else {
                        return Err(UM);
                    };
                    let order = sort_order(&vals, asc);
                    Ok(RV::V {
                        ty,
                        labels: order.iter().map(|&p| labels[p].clone()).collect(),
                        vals: order.iter().map(|&p| vals[p].clone()).collect(),
                    })
                });
                (
                    format!(
                        "{vs}.sort_values(ascending={})",
                        if asc { "True" } else { "False" }
                    ),
                    res,
                )
            }
            4 => {
                let (vs, vr) = self.vector(d - 1);
                let n = self.rng.random_range(-2..=6);
                let res = vr.map(|v| {
                    let RV::V { ty, labels, vals } = v else {
                        unreachable!()
                    };
                    let keep = head_len(n, vals.len());
                    RV::V {
                        ty,
                        labels: labels[..keep].to_vec(),
                        vals: vals[..keep].to_vec(),
                    }
                });
                (format!("{vs}.head({})", C::I(n).lit()), res)
            }
            5 => {
                let (vs, vr) = self.vector(d - 1);
                let (ms, mr) = self.mask(d - 1);
                let res = vr.and_then(|v| {
                    let m = mr?;
                    let RV::V { ty, labels, vals } = v else {
                        unreachable!()
                    };
                    let keep = align(&m, &labels)?;
                    let (mut l2, mut v2) = (Vec::new(), Vec::new());
                    for ((l, v), k) in labels.into_iter().zip(vals).zip(keep) {
                        if k {
                            l2.push(l);
                            v2.push(v);
                        }
                    }
                    Ok(RV::V {
                        ty,
                        labels: l2,
                        vals: v2,
                    })
                });
                (format!("{vs}[{ms}]"), res)
            }
            6 => {
                let (vs, vr) = self.vector(d - 1);
                let res = vr.and_then(|v| {
                    let RV::V { ty, labels, vals } = v else {
                        unreachable!()
                    };
                    if !matches!(ty, Ty::I | Ty::F) {
                        return Err(TM);
                    }
                    let vals = vals
                        .into_iter()
                        .map(|c| match c {
                            C::I(i) => C::I(i.abs()),
                            C::F(f) => C::F(f.abs()),
                            other => other,
                        })
                        .collect();
                    Ok(RV::V { ty, labels, vals })
                });
                (format!("{vs}.abs()"), res)
            }
            7 => {
                let (vs, vr) = self.vector(d - 1);
                let res = vr.map(|v| {
                    let RV::V { ty, vals, .. } = v else {
                        unreachable!()
                    };
                    RV::V {
                        ty,
                        labels: (0..vals.len() as i64).map(C::I).collect(),
                        vals,
                    }
                });
                (format!("{vs}.values"), res)
            }
            8 => {
                let (ms, mr) = self.mask(d - 1);
                let name = self.pick_name();
                let res = filter_frame(Ok(RV::Frame(self.all_rows())), mr).and_then(|f| {
                    let RV::Frame(rows) = f else { unreachable!() };
                    self.t.column(&rows, &name)
                });
                (format!("df.loc[{ms}, '{name}']"), res)
            }
            _ => self.column_of_frame(d.saturating_sub(1)),
        }
    }

    fn scalar(&mut self, d: u32) -> E {
        let k = if d == 0 {
            self.rng.random_range(0..3)
        } else {
            self.rng.random_range(0..14)
        };
        match k {
            0 => {
                let lit = self.literal_like(None);
                (lit.lit(), Ok(RV::S(lit)))
            }
            1 => {
                let (fs, fr) = self.frame(d.min(2));
                (
                    format!("len({fs})"),
                    fr.map(|f| {
                        if let RV::Frame(r) = f {
                            RV::S(C::I(r.len() as i64))
                        } else {
                            unreachable!()
                        }
                    }),
                )
            }
            2 => {
                let i = self.rng.random_range(-3..=2);
                let shape = [self.t.rows.len() as i64, self.t.names.len() as i64];
                (
                    format!("df.shape[{}]", C::I(i).lit()),
                    position(i, 2).map(|p| RV::S(C::I(shape[p]))),
                )
            }
            3 | 4 => {
                let (vs, vr) = self.vector(d - 1);
                let agg = self.agg();
                let res = vr.and_then(|v| {
                    let RV::V { ty, vals, .. } = v else {
                        unreachable!()
                    };
                    agg.apply(ty, &vals).map(RV::S)
                });
                (format!("{vs}.{}()", agg.name()), res)
            }
            5 => {
                let (vs, vr) = self.vector(d - 1);
                let i = self.rng.random_range(-3..=6);
                let res = vr.and_then(|v| {
                    let RV::V { vals, .. } = v else {
                        unreachable!()
                    };
                    Ok(RV::S(vals[position(i, vals.len())?].clone()))
                });
                (format!("{vs}.iloc[{}]", C::I(i).lit()), res)
            }
            6 => {
                let (vs, vr) = self.vector(d - 1);
                let i = self.rng.random_range(0..=9);
                let res = vr.and_then(|v| {
                    let RV::V { labels, vals, .. } = v else {
                        unreachable!()
                    };
                    let p = labels
                        .iter()
                        .position(|l| same_key(l, &C::I(i)))
                        .ok_or(IR)?;
                    Ok(RV::S(vals[p].clone()))
                });
                (format!("{vs}[{i}]"), res)
            }
            7 => {
                let (vs, vr) = self.vector(d - 1);
                let max = self.rng.random_bool(0.5);
                let name = self.pick_name();
                let res = vr.and_then(|v| {
                    let RV::V { labels, vals, .. } = v else {
                        unreachable!()
                    };
                    let mut best: Option<usize> = None;
                    for (i, c) in vals.iter().enumerate() {
                        if *c == C::N {
                            continue;
                        }
                        let better = best.is_none_or(|b| {
                            order(c, &vals[b])
                                == if max {
                                    Ordering::Greater
                                } else {
                                    Ordering::Less
                                }
                        });
                        if better {
                            best = Some(i);
                        }
                    }
                    let label = labels[best.ok_or(IR)?].clone();
                    let C::I(row) = label else { return Err(TM) };
                    let row = usize::try_from(row)
                        .ok()
                        .filter(|r| *r < self.t.rows.len())
                        .ok_or(IR)?;
                    let c = self.t.col(&name)?;
                    Ok(RV::S(self.t.rows[row][c].clone()))
                });
                (
                    format!(
                        "df.loc[{vs}.{}(), '{name}']",
                        if max { "idxmax" } else { "idxmin" }
                    ),
                    res,
                )
            }
            8 => {
                let (rs, rr) = self.row(d - 1);
                let name = self.pick_name();
                let res = rr.and_then(|r| {
                    let RV::Row(r) = r else { unreachable!() };
                    Ok(RV::S(self.t.rows[r][self.t.col(&name)?].clone()))
                });
                (format!("{rs}['{name}']"), res)
            }
            9 | 10 => {
                let (ls, lr) = self.scalar(d - 1);
                let (rs, rr) = self.scalar(d - 1);
                let op = self.op();
                let res = lr.and_then(|l| {
                    let r = rr?;
                    let (RV::S(a), RV::S(b)) = (l, r) else {
                        unreachable!()
                    };
                    if let (Some(ta), Some(tb)) = (a.ty(), b.ty()) {
                        arith_ty(ta, op, tb)?;
                    }
                    arith_cell(&a, op, &b).map(RV::S)
                });
                (format!("({ls} {} {rs})", op.sym()), res)
            }
            11 => {
                let (ss, sr) = self.scalar(d - 1);
                let digits = if self.rng.random_bool(0.5) {
                    None
                } else {
                    Some(self.rng.random_range(0..=2))
                };
                let res = sr.and_then(|s| {
                    let RV::S(c) = s else { unreachable!() };
                    Ok(RV::S(match (c, digits) {
                        (C::I(i), _) => C::I(i),
                        (C::B(b), _) => C::I(i64::from(b)),
                        (C::F(f), None) => C::I(f.round_ties_even() as i64),
                        (C::F(f), Some(n)) => fl(round_even(f, n)),
                        _ => return Err(TM),
                    }))
                });
                let src = match digits {
                    None => format!("round({ss})"),
                    Some(n) => format!("round({ss}, {n})"),
                };
                (src, res)
            }
            12 => {
                let (ss, sr) = self.scalar(d - 1);
                let f = *["abs", "int", "float", "len"]
                    .choose(&mut self.rng)
                    .unwrap();
                let res = sr.and_then(|s| {
                    let RV::S(c) = s else { unreachable!() };
                    Ok(RV::S(match (f, c) {
                        ("abs", C::I(i)) => C::I(i.abs()),
                        ("abs", C::F(x)) => C::F(x.abs()),
                        ("abs", C::N) => C::N,
                        ("int", C::I(i)) => C::I(i),
                        ("int", C::B(b)) => C::I(i64::from(b)),
                        ("int", C::F(x)) => C::I(x.trunc() as i64),
                        ("int", C::T(s)) => C::I(s.trim().parse().map_err(|_| TM)?),
                        ("float", C::I(i)) => C::F(i as f64),
                        ("float", C::B(b)) => C::F(f64::from(u8::from(b))),
                        ("float", C::F(x)) => C::F(x),
                        ("float", C::T(s)) => fl(s.trim().parse().map_err(|_| TM)?),
                        ("float", C::N) => C::N,
                        ("len", C::T(s)) => C::I(s.chars().count() as i64),
                        _ => return Err(TM),
                    }))
                });
                (format!("{f}({ss})"), res)
            }
            _ => {
                let (vs, vr) = self.vector(d - 1);
                let res = vr.map(|v| {
                    if let RV::V { vals, .. } = v {
                        RV::S(C::I(vals.len() as i64))
                    } else {
                        unreachable!()
                    }
                });
                (format!("len({vs})"), res)
            }
        }
    }

    fn row(&mut self, d: u32) -> E {
        let (fs, fr) = self.frame(d);
        let i = self.rng.random_range(-2..=6);
        let res = fr.and_then(|f| {
            let RV::Frame(rows) = f else { unreachable!() };
            Ok(RV::Row(rows[position(i, rows.len())?]))
        });
        (format!("{fs}.iloc[{}]", C::I(i).lit()), res)
    }

    fn list(&mut self, d: u32) -> E {
        let (vs, vr) = self.vector(d);
        if self.rng.random_bool(0.5) {
            (
                format!("{vs}.tolist()"),
                vr.map(|v| {
                    if let RV::V { vals, .. } = v {
                        RV::L(vals)
                    } else {
                        unreachable!()
                    }
                }),
            )
        } else {
            (
                format!("{vs}.unique()"),
                vr.map(|v| {
                    if let RV::V { vals, .. } = v {
                        RV::L(distinct(&vals))
                    } else {
                        unreachable!()
                    }
                }),
            )
        }
    }

    fn boolean(&mut self, d: u32) -> E {
        let k = if d == 0 {
            0
        } else {
            self.rng.random_range(0..9)
        };
        match k {
            0 | 1 => {
                let (ss, sr) = self.scalar(d.saturating_sub(1).max(1));
                let ty = sr
                    .as_ref()
                    .ok()
                    .and_then(|s| if let RV::S(c) = s { c.ty() } else { None });
                let lit = self.literal_like(ty);
                let op = self.cmp();
                (
                    format!("{ss} {} {}", op.sym(), lit.lit()),
                    sr.and_then(|s| cmp_scalars(s, op, RV::S(lit))),
                )
            }
            2 => {
                let (ls, lr) = self.scalar(d - 1);
                let (rs, rr) = self.scalar(d - 1);
                let op = self.cmp();
                (
                    format!("{ls} {} {rs}", op.sym()),
                    lr.and_then(|l| cmp_scalars(l, op, rr?)),
                )
            }
            3 | 4 => {
                let (ls, lr) = self.boolean(d - 1);
                let (rs, rr) = self.boolean(d - 1);
                let and = self.rng.random_bool(0.5);
                let res = lr.and_then(|l| {
                    let lt = truth(&l)?;
                    if lt != and {
                        return Ok(RV::S(C::B(lt)));
                    }
                    Ok(RV::S(C::B(truth(&rr?)?)))
                });
                (
                    format!("({ls}) {} ({rs})", if and { "and" } else { "or" }),
                    res,
                )
            }
            5 => {
                let (bs, br) = self.boolean(d - 1);
                (
                    format!("not ({bs})"),
                    br.and_then(|b| Ok(RV::S(C::B(!truth(&b)?)))),
                )
            }
            6 => {
                let (vs, vr) = self.vector(d - 1);
                let any = self.rng.random_bool(0.5);
                let res = vr.map(|v| {
                    let RV::V { vals, .. } = v else {
                        unreachable!()
                    };
                    let mut present = vals.iter().filter(|c| **c != C::N);
                    RV::S(C::B(if any {
                        present.any(C::truthy)
                    } else {
                        present.all(C::truthy)
                    }))
                });
                (format!("{vs}.{}()", if any { "any" } else { "all" }), res)
            }
            7 => {
                let (vs, vr) = self.vector(d - 1);
                let ty = vr.as_ref().ok().and_then(|v| {
                    if let RV::V { ty, .. } = v {
                        Some(*ty)
                    } else {
                        None
                    }
                });
                let items: Vec<C> = (0..self.rng.random_range(0..=2))
                    .map(|_| self.literal_like(ty))
                    .map(|c| match c {
                        C::I(i) => C::I(i.abs()),
                        C::F(f) => C::F(f.abs()),
                        other => other,
                    })
                    .collect();
                let op = if self.rng.random_bool(0.8) {
                    Cmp::Eq
                } else {
                    self.cmp()
                };
                let res = vr.and_then(|v| {
                    let RV::V { vals, .. } = v else {
                        unreachable!()
                    };
                    if !matches!(op, Cmp::Eq | Cmp::Ne) {
                        return Err(TM);
                    }
                    let eq = vals.len() == items.len()
                        && vals.iter().zip(&items).all(|(a, b)| loosely_equal(a, b));
                    Ok(RV::S(C::B(eq == matches!(op, Cmp::Eq))))
                });
                let list = items.iter().map(C::lit).collect::<Vec<_>>().join(", ");
                (format!("{vs}.tolist() {} [{list}]", op.sym()), res)
            }
            _ => {
                // a non-scalar operand of `and`, usually ambiguous
                let (os, or) = if self.rng.random_bool(0.5) {
                    self.vector(d - 1)
                } else {
                    self.frame(d - 1)
                };
                let (bs, br) = self.boolean(d - 1);
                let res = or.and_then(|o| {
                    if !truth(&o)? {
                        return Ok(RV::S(C::B(false)));
                    }
                    Ok(RV::S(C::B(truth(&br?)?)))
                });
                (format!("({os}) and ({bs})"), res)
            }
        }
    }
}

/// `isin` and list equality: numbers compare across int/float, missing
/// never matches.
fn loosely_equal(a: &C, b: &C) -> bool {
    match (a, b) {
        (C::N, _) | (_, C::N) => false,
        (C::I(_) | C::F(_), C::I(_) | C::F(_)) => a.num() == b.num(),
        _ => a == b,
    }
}

fn cmp_vec_scalar(v: RV, op: Cmp, lit: &C) -> Res {
    let RV::V { ty, labels, vals } = v else {
        unreachable!()
    };
    if let Some(lt) = lit.ty() {
        if numeric_group(ty) != numeric_group(lt) {
            return Err(TM);
        }
    }
    Ok(RV::V {
        ty: Ty::B,
        labels,
        vals: vals.iter().map(|c| C::B(op.holds(c, lit))).collect(),
    })
}

fn cmp_scalars(l: RV, op: Cmp, r: RV) -> Res {
    match (l, r) {
        (RV::S(a), RV::S(b)) => {
            if let (Some(ta), Some(tb)) = (a.ty(), b.ty()) {
                if numeric_group(ta) != numeric_group(tb) {
                    return Err(TM);
                }
            }
            Ok(RV::S(C::B(op.holds(&a, &b))))
        }
        _ => Err(TM),
    }
}

fn bitwise(l: RV, and: bool, r: RV) -> Res {
    let (
        RV::V {
            ty: lt,
            labels: ll,
            vals: lv,
        },
        RV::V {
            ty: rt,
            labels: rl,
            vals: rv,
        },
    ) = (l, r)
    else {
        return Err(TM);
    };
    if lt != Ty::B || rt != Ty::B || ll != rl {
        return Err(TM);
    }
    let b = |c: &C| matches!(c, C::B(true));
    let vals = lv
        .iter()
        .zip(&rv)
        .map(|(x, y)| C::B(if and { b(x) && b(y) } else { b(x) || b(y) }))
        .collect();
    Ok(RV::V {
        ty: Ty::B,
        labels: ll,
        vals,
    })
}

/// Mask entry for each target label, matched by label.
fn align(mask: &RV, labels: &[C]) -> Result<Vec<bool>, &'static str> {
    let RV::V {
        ty: Ty::B,
        labels: ml,
        vals,
    } = mask
    else {
        return Err(TM);
    };
    labels
        .iter()
        .map(|l| {
            let p = ml.iter().position(|m| same_key(m, l)).ok_or(TM)?;
            Ok(vals[p] == C::B(true))
        })
        .collect()
}

fn filter_frame(frame: Res, mask: Res) -> Res {
    let RV::Frame(rows) = frame? else {
        unreachable!()
    };
    let mask = mask?;
    let labels: Vec<C> = rows.iter().map(|&r| C::I(r as i64)).collect();
    let keep = align(&mask, &labels)?;
    Ok(RV::Frame(
        rows.into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(r, _)| r)
            .collect(),
    ))
}

/// Outcome of comparing the engine with the reference on generated cases.
pub struct Comparison {
    pub total: usize,
    pub errors: usize,
    pub disagreements: Vec<String>,
}

/// Generates `tables` random tables with `per_table` expressions each and
/// runs every expression through the engine.
pub fn compare_with_engine(seed: u64, tables: usize, per_table: usize) -> Comparison {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Comparison {
        total: 0,
        errors: 0,
        disagreements: Vec::new(),
    };
    for i in 0..tables {
        let reference = random_table(&mut rng);
        let table = reference.to_table();
        let mut gen = Gen::new(
            seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
            &reference,
        );
        for _ in 0..per_table {
            let case = gen.case();
            out.total += 1;
            let actual = tabexec::execute_answer(&case.src, &table);
            let ok = match (&actual, &case.expected) {
                (Ok(v), Ok(e)) => agrees(v, e, &reference),
                (Err(a), Err(e)) => {
                    out.errors += 1;
                    a.kind.name() == *e
                }
                _ => false,
            };
            if !ok {
                out.disagreements.push(format!(
                    "table {i} {:?}: `{}`\n  engine:    {:?}\n  reference: {:?}",
                    reference.names,
                    case.src,
                    actual.map(|v| v.render()),
                    case.expected
                ));
            }
        }
    }
    out
}
