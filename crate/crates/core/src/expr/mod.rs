//! The pandas-style query dialect: parsing, evaluation and truthiness.

mod ast;
mod error;
mod eval;
mod lexer;
mod parser;
mod value;

pub use ast::{Accessor, ArithOp, CmpOp, Expr, Function, Keyword, LogicOp, Member, Method};
pub use error::{EvalError, EvalErrorKind};
pub use eval::{coerce_truth, evaluate};
pub use parser::parse;
pub use value::{Row, Series, Value};

use crate::table::Table;

/// Parses and evaluates `source`, reducing the result to a verdict.
pub fn execute_verdict(source: &str, table: &Table) -> Result<bool, EvalError> {
    let expr = parse(source)?;
    coerce_truth(&evaluate(&expr, table)?)
}

/// Parses and evaluates `source`, returning the raw value.
pub fn execute_answer(source: &str, table: &Table) -> Result<Value, EvalError> {
    evaluate(&parse(source)?, table)
}
