use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalErrorKind {
    ParseError,
    UnknownColumn,
    UnknownMethod,
    TypeMismatch,
    IndexOutOfRange,
    DivisionByZero,
    AmbiguousTruth,
    UnsupportedSyntax,
}

impl EvalErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            EvalErrorKind::ParseError => "ParseError",
            EvalErrorKind::UnknownColumn => "UnknownColumn",
            EvalErrorKind::UnknownMethod => "UnknownMethod",
            EvalErrorKind::TypeMismatch => "TypeMismatch",
            EvalErrorKind::IndexOutOfRange => "IndexOutOfRange",
            EvalErrorKind::DivisionByZero => "DivisionByZero",
            EvalErrorKind::AmbiguousTruth => "AmbiguousTruth",
            EvalErrorKind::UnsupportedSyntax => "UnsupportedSyntax",
        }
    }

    pub const ALL: [EvalErrorKind; 8] = [
        EvalErrorKind::ParseError,
        EvalErrorKind::UnknownColumn,
        EvalErrorKind::UnknownMethod,
        EvalErrorKind::TypeMismatch,
        EvalErrorKind::IndexOutOfRange,
        EvalErrorKind::DivisionByZero,
        EvalErrorKind::AmbiguousTruth,
        EvalErrorKind::UnsupportedSyntax,
    ];

    pub fn from_name(name: &str) -> Option<EvalErrorKind> {
        EvalErrorKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Kind named at the front of a rendered error, as in `"TypeMismatch: ..."`.
    pub fn from_rendered(text: &str) -> Option<EvalErrorKind> {
        text.split_once(':')
            .and_then(|(head, _)| EvalErrorKind::from_name(head.trim()))
    }

    /// Syntax-level rejections, as opposed to runtime failures.
    pub fn is_syntactic(self) -> bool {
        matches!(
            self,
            EvalErrorKind::ParseError | EvalErrorKind::UnsupportedSyntax
        )
    }
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Failure to parse or evaluate an expression. The rendered form
/// `<Kind>: <detail>` is a stable single line; correction prompts embed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub detail: String,
    /// Character offset into the source, for parse-time errors.
    pub offset: Option<usize>,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, detail: impl Into<String>) -> EvalError {
        let detail: String = detail.into();
        // keep the message on one line
        let detail = detail.replace(['\n', '\r'], " ");
        EvalError {
            kind,
            detail,
            offset: None,
        }
    }

    pub fn at(kind: EvalErrorKind, offset: usize, detail: impl Into<String>) -> EvalError {
        let mut e = EvalError::new(kind, detail);
        e.offset = Some(offset);
        e
    }

    pub fn message(&self) -> String {
        self.to_string()
    }

    pub(crate) fn type_mismatch(detail: impl Into<String>) -> EvalError {
        EvalError::new(EvalErrorKind::TypeMismatch, detail)
    }

    pub(crate) fn out_of_range(detail: impl Into<String>) -> EvalError {
        EvalError::new(EvalErrorKind::IndexOutOfRange, detail)
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.offset {
            Some(at) => write!(f, "{}: {} (at offset {at})", self.kind, self.detail),
            None => write!(f, "{}: {}", self.kind, self.detail),
        }
    }
}

impl std::error::Error for EvalError {}
