use super::ast::{Accessor, ArithOp, CmpOp, Expr, Function, Keyword, LogicOp, Member, Method};
use super::error::{EvalError, EvalErrorKind};
use super::lexer::{tokenize, Tok, Token};
use crate::table::CellValue;

pub(crate) const MAX_DEPTH: usize = 64;

const PY_KEYWORDS: &[&str] = &[
    "None", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "pass", "raise", "return", "try", "while", "with", "yield",
];

/// Parses one line of the table-expression dialect.
pub fn parse(source: &str) -> Result<Expr, EvalError> {
    if source.trim().is_empty() {
        return Err(EvalError::at(
            EvalErrorKind::ParseError,
            0,
            "empty expression",
        ));
    }
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    let expr = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

fn boxed(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].at
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), EvalError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn unsupported(&self, what: impl Into<String>) -> EvalError {
        EvalError::at(EvalErrorKind::UnsupportedSyntax, self.offset(), what)
    }

    /// Error for the current token when `wanted` was expected. Python syntax
    /// outside the dialect is reported as unsupported rather than malformed.
    fn unexpected(&self, wanted: &str) -> EvalError {
        match self.peek() {
            Tok::Unsupported(op) => self.unsupported(format!("operator '{op}' is not supported")),
            Tok::Ident(name) if PY_KEYWORDS.contains(&name.as_str()) => {
                self.unsupported(format!("keyword '{name}' is not supported"))
            }
            other => EvalError::at(
                EvalErrorKind::ParseError,
                self.offset(),
                format!("expected {wanted}, found {}", other.describe()),
            ),
        }
    }

    fn enter(&mut self) -> Result<(), EvalError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.unsupported(format!("expression nesting deeper than {MAX_DEPTH}")));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn expr(&mut self) -> Result<Expr, EvalError> {
        self.enter()?;
        let r = self.or_kw();
        self.leave();
        r
    }

    fn or_kw(&mut self) -> Result<Expr, EvalError> {
        let mut lhs = self.and_kw()?;
        while self.is_ident("or") {
            self.bump();
            let rhs = self.and_kw()?;
            lhs = Expr::Logic {
                lhs: boxed(lhs),
                op: LogicOp::Or,
                rhs: boxed(rhs),
            };
        }
        Ok(lhs)
    }

    fn and_kw(&mut self) -> Result<Expr, EvalError> {
        let mut lhs = self.not_kw()?;
        while self.is_ident("and") {
            self.bump();
            let rhs = self.not_kw()?;
            lhs = Expr::Logic {
                lhs: boxed(lhs),
                op: LogicOp::And,
                rhs: boxed(rhs),
            };
        }
        Ok(lhs)
    }

    fn not_kw(&mut self) -> Result<Expr, EvalError> {
        if self.is_ident("not") {
            self.bump();
            self.enter()?;
            let operand = self.not_kw();
            self.leave();
            return Ok(Expr::Not {
                operand: boxed(operand?),
                elementwise: false,
            });
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> Result<Expr, EvalError> {
        let lhs = self.bit_or()?;
        let Some(op) = self.cmp_op() else {
            if self.is_ident("in")
                || self.is_ident("is")
                || (self.is_ident("not") && matches!(self.peek_at(1), Tok::Ident(s) if s == "in"))
            {
                return Err(self.unsupported(
                    "membership and identity operators ('in', 'is') are not supported",
                ));
            }
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.bit_or()?;
        if self.cmp_op().is_some() {
            return Err(self.unsupported("chained comparisons; combine with & and parentheses"));
        }
        Ok(Expr::Compare {
            lhs: boxed(lhs),
            op,
            rhs: boxed(rhs),
        })
    }

    fn bit_or(&mut self) -> Result<Expr, EvalError> {
        let mut lhs = self.bit_and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.bit_and()?;
            lhs = Expr::Logic {
                lhs: boxed(lhs),
                op: LogicOp::BitOr,
                rhs: boxed(rhs),
            };
        }
        Ok(lhs)
    }

    fn bit_and(&mut self) -> Result<Expr, EvalError> {
        let mut lhs = self.additive()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.additive()?;
            lhs = Expr::Logic {
                lhs: boxed(lhs),
                op: LogicOp::BitAnd,
                rhs: boxed(rhs),
            };
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, EvalError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Arith {
                lhs: boxed(lhs),
                op,
                rhs: boxed(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, EvalError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Arith {
                lhs: boxed(lhs),
                op,
                rhs: boxed(rhs),
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, EvalError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                self.enter()?;
                let operand = self.unary();
                self.leave();
                Ok(match operand? {
                    Expr::Literal(CellValue::Int(i)) if i.checked_neg().is_some() => {
                        Expr::Literal(CellValue::Int(-i))
                    }
                    Expr::Literal(CellValue::Float(f)) => Expr::Literal(CellValue::Float(-f)),
                    other => Expr::Neg(boxed(other)),
                })
            }
            Tok::Tilde => {
                self.bump();
                self.enter()?;
                let operand = self.unary();
                self.leave();
                Ok(Expr::Not {
                    operand: boxed(operand?),
                    elementwise: true,
                })
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, EvalError> {
        let mut expr = self.primary()?;
        loop {
            match self.peek() {
                Tok::LBracket => {
                    self.bump();
                    expr = self.subscript(expr)?;
                }
                Tok::Dot => {
                    self.bump();
                    expr = self.attribute(expr)?;
                }
                Tok::LParen => {
                    return Err(self.unsupported(
                        "calls are only allowed on whitelisted functions and methods",
                    ));
                }
                _ => return Ok(expr),
            }
        }
    }

    fn subscript(&mut self, target: Expr) -> Result<Expr, EvalError> {
        if let (Tok::Str(name), Tok::RBracket) = (self.peek().clone(), self.peek_at(1)) {
            self.bump();
            self.bump();
            return Ok(Expr::Column {
                target: boxed(target),
                name,
            });
        }
        let int_literal = matches!((self.peek(), self.peek_at(1)), (Tok::Int(_), Tok::RBracket))
            || matches!(
                (self.peek(), self.peek_at(1), self.peek_at(2)),
                (Tok::Minus, Tok::Int(_), Tok::RBracket)
            );
        let inner = self.expr()?;
        if self.peek() == &Tok::Comma {
            return Err(self.unsupported("tuple subscripts"));
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(if int_literal {
            Expr::Index {
                target: boxed(target),
                accessor: Accessor::Label,
                index: boxed(inner),
            }
        } else {
            Expr::Filter {
                target: boxed(target),
                mask: boxed(inner),
            }
        })
    }

    fn attribute(&mut self, target: Expr) -> Result<Expr, EvalError> {
        let name = match self.peek().clone() {
            Tok::Ident(n) => n,
            _ => return Err(self.unexpected("an attribute name")),
        };
        let name_at = self.offset();
        self.bump();
        match name.as_str() {
            "iloc" => {
                self.expect(Tok::LBracket, "'[' after .iloc")?;
                let index = self.expr()?;
                if self.peek() == &Tok::Comma {
                    return Err(self.unsupported("tuple subscripts"));
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(Expr::Index {
                    target: boxed(target),
                    accessor: Accessor::Iloc,
                    index: boxed(index),
                })
            }
            "loc" => {
                self.expect(Tok::LBracket, "'[' after .loc")?;
                let mask = self.expr()?;
                let column = if self.eat(&Tok::Comma) {
                    match self.bump() {
                        Tok::Str(c) => Some(c),
                        _ => {
                            return Err(
                                self.unsupported(".loc column must be a single string literal")
                            )
                        }
                    }
                } else {
                    None
                };
                self.expect(Tok::RBracket, "']'")?;
                Ok(Expr::Loc {
                    target: boxed(target),
                    mask: boxed(mask),
                    column,
                })
            }
            "shape" => Ok(Expr::Member {
                target: boxed(target),
                member: Member::Shape,
            }),
            "values" => Ok(Expr::Member {
                target: boxed(target),
                member: Member::Values,
            }),
            "str" => {
                self.expect(Tok::Dot, "'.' after .str")?;
                let m = match self.bump() {
                    Tok::Ident(m) => m,
                    _ => return Err(self.unsupported("string accessor needs a method")),
                };
                let method = Method::from_str_accessor(&m).ok_or_else(|| {
                    EvalError::at(
                        EvalErrorKind::UnsupportedSyntax,
                        name_at,
                        format!("string method 'str.{m}' is not supported"),
                    )
                })?;
                self.call(target, method)
            }
            "groupby" => self.groupby(target),
            _ => match Method::from_name(&name) {
                Some(method) => {
                    if self.peek() != &Tok::LParen {
                        return Err(self.unsupported(format!("method '{name}' must be called")));
                    }
                    self.call(target, method)
                }
                None => Err(EvalError::at(
                    EvalErrorKind::UnsupportedSyntax,
                    name_at,
                    format!("attribute '{name}' is not supported; select columns with df['...']"),
                )),
            },
        }
    }

    fn call(&mut self, receiver: Expr, method: Method) -> Result<Expr, EvalError> {
        let (args, kwargs) = self.arguments()?;
        Ok(Expr::MethodCall {
            receiver: boxed(receiver),
            method,
            args,
            kwargs,
        })
    }

    fn groupby(&mut self, target: Expr) -> Result<Expr, EvalError> {
        let form = "groupby must be written as .groupby('key')['column'].<aggregation>()";
        let step = |p: &mut Parser, tok: Tok| -> Result<(), EvalError> {
            if p.eat(&tok) {
                Ok(())
            } else {
                Err(p.unsupported(form))
            }
        };
        step(self, Tok::LParen)?;
        let Tok::Str(by) = self.bump() else {
            return Err(self.unsupported(form));
        };
        step(self, Tok::RParen)?;
        step(self, Tok::LBracket)?;
        let Tok::Str(column) = self.bump() else {
            return Err(self.unsupported(form));
        };
        step(self, Tok::RBracket)?;
        step(self, Tok::Dot)?;
        let agg = match self.bump() {
            Tok::Ident(n) => Method::from_name(&n).filter(|m| m.is_group_aggregation()),
            _ => None,
        }
        .ok_or_else(|| self.unsupported(form))?;
        step(self, Tok::LParen)?;
        step(self, Tok::RParen)?;
        Ok(Expr::GroupBy {
            target: boxed(target),
            by,
            column,
            agg,
        })
    }

    #[allow(clippy::type_complexity)]
    fn arguments(&mut self) -> Result<(Vec<Expr>, Vec<(Keyword, Expr)>), EvalError> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        let mut kwargs: Vec<(Keyword, Expr)> = Vec::new();
        while self.peek() != &Tok::RParen {
            if let (Tok::Ident(name), Tok::Unsupported("=")) =
                (self.peek().clone(), self.peek_at(1))
            {
                let kw = Keyword::from_name(&name).ok_or_else(|| {
                    self.unsupported(format!("keyword argument '{name}' is not supported"))
                })?;
                self.bump();
                self.bump();
                if kwargs.iter().any(|(k, _)| *k == kw) {
                    return Err(self.unsupported(format!("repeated keyword argument '{name}'")));
                }
                kwargs.push((kw, self.expr()?));
            } else {
                if !kwargs.is_empty() {
                    return Err(EvalError::at(
                        EvalErrorKind::ParseError,
                        self.offset(),
                        "positional argument follows keyword argument",
                    ));
                }
                args.push(self.expr()?);
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen, "')'")?;
        Ok((args, kwargs))
    }

    fn primary(&mut self) -> Result<Expr, EvalError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Literal(CellValue::Int(i)))
            }
            Tok::Float(f) => {
                self.bump();
                Ok(Expr::Literal(CellValue::Float(f)))
            }
            Tok::Str(s) => {
                self.bump();
                if matches!(self.peek(), Tok::Str(_)) {
                    return Err(self.unsupported("implicit string concatenation"));
                }
                Ok(Expr::Literal(CellValue::Text(s)))
            }
            Tok::LParen => {
                self.bump();
                if self.peek() == &Tok::RParen {
                    return Err(self.unsupported("tuples"));
                }
                let inner = self.expr()?;
                if self.peek() == &Tok::Comma {
                    return Err(self.unsupported("tuples"));
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                while self.peek() != &Tok::RBracket {
                    items.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket, "']' closing the list")?;
                Ok(Expr::List(items))
            }
            Tok::Ident(name) => {
                match name.as_str() {
                    "df" => {
                        self.bump();
                        return Ok(Expr::Table);
                    }
                    "True" | "False" => {
                        self.bump();
                        return Ok(Expr::Literal(CellValue::Bool(name == "True")));
                    }
                    _ => {}
                }
                if let Some(func) = Function::from_name(&name) {
                    self.bump();
                    if self.peek() != &Tok::LParen {
                        return Err(EvalError::at(
                            EvalErrorKind::UnsupportedSyntax,
                            at,
                            format!("function '{name}' must be called"),
                        ));
                    }
                    let (args, kwargs) = self.arguments()?;
                    if !kwargs.is_empty() {
                        return Err(EvalError::at(
                            EvalErrorKind::UnsupportedSyntax,
                            at,
                            format!("keyword arguments to {name}()"),
                        ));
                    }
                    return Ok(Expr::FunctionCall { func, args });
                }
                if PY_KEYWORDS.contains(&name.as_str()) {
                    return Err(self.unsupported(format!("keyword '{name}' is not supported")));
                }
                Err(self.unsupported(format!(
                    "name '{name}' is not allowed; only df and len, abs, round, str, int, float are available"
                )))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
