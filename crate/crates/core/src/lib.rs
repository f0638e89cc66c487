//! Execution-based table fact verification and table question answering:
//! a typed table model, a sandboxed pandas-style query dialect, a chat-model
//! gateway, correction passes, dataset builders and evaluation.

pub mod correction;
pub mod expr;
pub mod forge;
pub mod gateway;
pub mod table;
pub mod verifier;

pub use expr::{
    coerce_truth, evaluate, execute_answer, execute_verdict, parse, EvalError, EvalErrorKind, Expr,
    Value,
};
pub use table::{load_table, CellValue, ColumnType, Table, TableError};
