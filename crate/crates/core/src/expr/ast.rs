use std::fmt;

use crate::table::CellValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// `&`/`|` combine element-wise; `and`/`or` use truthiness and short-circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicOp {
    BitAnd,
    BitOr,
    And,
    Or,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::BitAnd => "&",
            LogicOp::BitOr => "|",
            LogicOp::And => "and",
            LogicOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// Whitelisted methods. `Str*` variants are reached through the `.str`
/// accessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sum,
    Mean,
    Max,
    Min,
    Count,
    Nunique,
    Unique,
    Any,
    All,
    Tolist,
    Abs,
    Isin,
    Idxmax,
    Idxmin,
    SortValues,
    Head,
    StrContains,
    StrLower,
    StrStartswith,
}

impl Method {
    pub fn from_name(name: &str) -> Option<Method> {
        Some(match name {
            "sum" => Method::Sum,
            "mean" => Method::Mean,
            "max" => Method::Max,
            "min" => Method::Min,
            "count" => Method::Count,
            "nunique" => Method::Nunique,
            "unique" => Method::Unique,
            "any" => Method::Any,
            "all" => Method::All,
            "tolist" => Method::Tolist,
            "abs" => Method::Abs,
            "isin" => Method::Isin,
            "idxmax" => Method::Idxmax,
            "idxmin" => Method::Idxmin,
            "sort_values" => Method::SortValues,
            "head" => Method::Head,
            _ => return None,
        })
    }

    pub fn from_str_accessor(name: &str) -> Option<Method> {
        Some(match name {
            "contains" => Method::StrContains,
            "lower" => Method::StrLower,
            "startswith" => Method::StrStartswith,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Sum => "sum",
            Method::Mean => "mean",
            Method::Max => "max",
            Method::Min => "min",
            Method::Count => "count",
            Method::Nunique => "nunique",
            Method::Unique => "unique",
            Method::Any => "any",
            Method::All => "all",
            Method::Tolist => "tolist",
            Method::Abs => "abs",
            Method::Isin => "isin",
            Method::Idxmax => "idxmax",
            Method::Idxmin => "idxmin",
            Method::SortValues => "sort_values",
            Method::Head => "head",
            Method::StrContains => "str.contains",
            Method::StrLower => "str.lower",
            Method::StrStartswith => "str.startswith",
        }
    }

    /// Aggregations allowed after `groupby(..)[..]`.
    pub fn is_group_aggregation(self) -> bool {
        matches!(
            self,
            Method::Sum
                | Method::Mean
                | Method::Max
                | Method::Min
                | Method::Count
                | Method::Nunique
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Len,
    Abs,
    Round,
    Str,
    Int,
    Float,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Function> {
        Some(match name {
            "len" => Function::Len,
            "abs" => Function::Abs,
            "round" => Function::Round,
            "str" => Function::Str,
            "int" => Function::Int,
            "float" => Function::Float,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Len => "len",
            Function::Abs => "abs",
            Function::Round => "round",
            Function::Str => "str",
            Function::Int => "int",
            Function::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    Shape,
    Values,
}

/// How `[i]` addresses its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accessor {
    /// Plain subscript: label lookup on vectors, position on lists.
    Label,
    /// `.iloc[i]`: position.
    Iloc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Ascending,
    By,
    N,
}

impl Keyword {
    pub fn from_name(name: &str) -> Option<Keyword> {
        Some(match name {
            "ascending" => Keyword::Ascending,
            "by" => Keyword::By,
            "n" => Keyword::N,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Keyword::Ascending => "ascending",
            Keyword::By => "by",
            Keyword::N => "n",
        }
    }
}

/// Abstract syntax of the table-expression dialect.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(CellValue),
    List(Vec<Expr>),
    /// `df`
    Table,
    /// `target['name']`
    Column {
        target: Box<Expr>,
        name: String,
    },
    /// `target[mask]`
    Filter {
        target: Box<Expr>,
        mask: Box<Expr>,
    },
    /// `target[i]` / `target.iloc[i]`
    Index {
        target: Box<Expr>,
        accessor: Accessor,
        index: Box<Expr>,
    },
    /// `target.loc[mask]` / `target.loc[mask, 'column']`
    Loc {
        target: Box<Expr>,
        mask: Box<Expr>,
        column: Option<String>,
    },
    Member {
        target: Box<Expr>,
        member: Member,
    },
    Compare {
        lhs: Box<Expr>,
        op: CmpOp,
        rhs: Box<Expr>,
    },
    Logic {
        lhs: Box<Expr>,
        op: LogicOp,
        rhs: Box<Expr>,
    },
    /// `~x` when `elementwise`, `not x` otherwise.
    Not {
        operand: Box<Expr>,
        elementwise: bool,
    },
    Arith {
        lhs: Box<Expr>,
        op: ArithOp,
        rhs: Box<Expr>,
    },
    Neg(Box<Expr>),
    MethodCall {
        receiver: Box<Expr>,
        method: Method,
        args: Vec<Expr>,
        kwargs: Vec<(Keyword, Expr)>,
    },
    /// `target.groupby('by')['column'].agg()`
    GroupBy {
        target: Box<Expr>,
        by: String,
        column: String,
        agg: Method,
    },
    FunctionCall {
        func: Function,
        args: Vec<Expr>,
    },
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

fn literal(v: &CellValue) -> String {
    match v {
        CellValue::Text(s) => quote(s),
        // Null has no literal form; only produced by evaluation.
        CellValue::Null => "nan".to_string(),
        other => other.to_display(),
    }
}

/// Numeric literals need parentheses before a trailer (`(5).abs()`).
struct Target<'a>(&'a Expr);

impl fmt::Display for Target<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expr::Literal(CellValue::Int(_) | CellValue::Float(_)) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

fn join(items: &[Expr]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical source form. Binary operations are fully parenthesized, so the
/// output re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => f.write_str(&literal(v)),
            Expr::List(items) => write!(f, "[{}]", join(items)),
            Expr::Table => f.write_str("df"),
            Expr::Column { target, name } => write!(f, "{}[{}]", Target(target), quote(name)),
            Expr::Filter { target, mask } => write!(f, "{}[{mask}]", Target(target)),
            Expr::Index {
                target,
                accessor: Accessor::Label,
                index,
            } => write!(f, "{}[{index}]", Target(target)),
            Expr::Index {
                target,
                accessor: Accessor::Iloc,
                index,
            } => write!(f, "{}.iloc[{index}]", Target(target)),
            Expr::Loc {
                target,
                mask,
                column: None,
            } => write!(f, "{}.loc[{mask}]", Target(target)),
            Expr::Loc {
                target,
                mask,
                column: Some(c),
            } => write!(f, "{}.loc[{mask}, {}]", Target(target), quote(c)),
            Expr::Member {
                target,
                member: Member::Shape,
            } => write!(f, "{}.shape", Target(target)),
            Expr::Member {
                target,
                member: Member::Values,
            } => write!(f, "{}.values", Target(target)),
            Expr::Compare { lhs, op, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Logic { lhs, op, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Not {
                operand,
                elementwise: true,
            } => write!(f, "(~{operand})"),
            Expr::Not {
                operand,
                elementwise: false,
            } => write!(f, "(not {operand})"),
            Expr::Arith { lhs, op, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::MethodCall {
                receiver,
                method,
                args,
                kwargs,
            } => {
                write!(f, "{}.{}(", Target(receiver), method.name())?;
                let mut parts: Vec<String> = args.iter().map(ToString::to_string).collect();
                parts.extend(kwargs.iter().map(|(k, v)| format!("{}={v}", k.name())));
                write!(f, "{})", parts.join(", "))
            }
            Expr::GroupBy {
                target,
                by,
                column,
                agg,
            } => {
                write!(
                    f,
                    "{}.groupby({})[{}].{}()",
                    Target(target),
                    quote(by),
                    quote(column),
                    agg.name()
                )
            }
            Expr::FunctionCall { func, args } => write!(f, "{}({})", func.name(), join(args)),
        }
    }
}
