use super::error::{EvalError, EvalErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Int(i64),
    Float(f64),
    Str(String),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Amp,
    Pipe,
    Tilde,
    /// Valid Python, outside the dialect.
    Unsupported(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Int(i) => format!("integer {i}"),
            Tok::Float(f) => format!("number {f}"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Ident(s) => format!("name '{s}'"),
            Tok::Unsupported(s) => format!("'{s}'"),
            Tok::Eof => "end of input".to_string(),
            other => format!("'{}'", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Tilde => "~",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    /// Character offset of the first character.
    pub at: usize,
}

pub(crate) const MAX_SOURCE_CHARS: usize = 4096;

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

fn unsupported(at: usize, what: impl Into<String>) -> EvalError {
    EvalError::at(EvalErrorKind::UnsupportedSyntax, at, what)
}

fn parse_error(at: usize, what: impl Into<String>) -> EvalError {
    EvalError::at(EvalErrorKind::ParseError, at, what)
}

impl Lexer {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn number(&mut self) -> Result<Tok, EvalError> {
        let start = self.pos;
        let mut is_float = false;
        while matches!(self.peek(0), Some(c) if c.is_ascii_digit() || c == '_') {
            self.pos += 1;
        }
        if self.peek(0) == Some('.') && matches!(self.peek(1), Some(c) if c.is_ascii_digit()) {
            is_float = true;
            self.pos += 1;
            while matches!(self.peek(0), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        } else if self.peek(0) == Some('.')
            && !matches!(self.peek(1), Some(c) if c.is_alphabetic() || c == '_')
        {
            // "5." is a float; "5.abs" is a trailer on an int
            is_float = true;
            self.pos += 1;
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let mut look = 1;
            if matches!(self.peek(1), Some('+' | '-')) {
                look = 2;
            }
            if matches!(self.peek(look), Some(c) if c.is_ascii_digit()) {
                is_float = true;
                self.pos += look;
                while matches!(self.peek(0), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos]
            .iter()
            .filter(|&&c| c != '_')
            .collect();
        if matches!(self.peek(0), Some(c) if c.is_alphanumeric() || c == '_') {
            return Err(parse_error(
                start,
                format!("invalid number literal near '{text}'"),
            ));
        }
        if is_float {
            let v: f64 = text
                .parse()
                .map_err(|_| parse_error(start, format!("invalid number '{text}'")))?;
            if !v.is_finite() {
                return Err(parse_error(start, format!("number '{text}' out of range")));
            }
            Ok(Tok::Float(v))
        } else {
            if text.len() > 1 && text.starts_with('0') {
                return Err(parse_error(
                    start,
                    format!("leading zeros in integer '{text}'"),
                ));
            }
            text.parse::<i64>()
                .map(Tok::Int)
                .map_err(|_| parse_error(start, format!("integer '{text}' out of range")))
        }
    }

    fn string(&mut self, quote: char) -> Result<Tok, EvalError> {
        let start = self.pos;
        if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
            return Err(unsupported(start, "triple-quoted strings"));
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek(0) {
                None => return Err(parse_error(start, "unterminated string literal")),
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(Tok::Str(out));
                }
                Some('\\') => {
                    let esc = self
                        .peek(1)
                        .ok_or_else(|| parse_error(start, "unterminated string literal"))?;
                    let ch = match esc {
                        'n' => '\n',
                        't' => '\t',
                        'r' => '\r',
                        '\\' => '\\',
                        '\'' => '\'',
                        '"' => '"',
                        other => {
                            return Err(unsupported(
                                self.pos,
                                format!("string escape '\\{other}'"),
                            ));
                        }
                    };
                    out.push(ch);
                    self.pos += 2;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn next(&mut self) -> Result<Token, EvalError> {
        while matches!(self.peek(0), Some(' ' | '\t')) {
            self.pos += 1;
        }
        let at = self.pos;
        let Some(c) = self.peek(0) else {
            return Ok(Token { tok: Tok::Eof, at });
        };
        let two = |l: &Lexer| l.peek(1);
        let (tok, width) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '~' => (Tok::Tilde, 1),
            '&' => (Tok::Amp, 1),
            '|' => (Tok::Pipe, 1),
            '*' if two(self) == Some('*') => (Tok::Unsupported("**"), 2),
            '*' => (Tok::Star, 1),
            '/' if two(self) == Some('/') => (Tok::Unsupported("//"), 2),
            '/' => (Tok::Slash, 1),
            '=' if two(self) == Some('=') => (Tok::EqEq, 2),
            '=' => (Tok::Unsupported("="), 1),
            '!' if two(self) == Some('=') => (Tok::NotEq, 2),
            '<' if two(self) == Some('=') => (Tok::Le, 2),
            '<' if two(self) == Some('<') => (Tok::Unsupported("<<"), 2),
            '<' => (Tok::Lt, 1),
            '>' if two(self) == Some('=') => (Tok::Ge, 2),
            '>' if two(self) == Some('>') => (Tok::Unsupported(">>"), 2),
            '>' => (Tok::Gt, 1),
            ':' => (Tok::Unsupported(":"), 1),
            ';' => (Tok::Unsupported(";"), 1),
            '%' => (Tok::Unsupported("%"), 1),
            '@' => (Tok::Unsupported("@"), 1),
            '^' => (Tok::Unsupported("^"), 1),
            '{' => (Tok::Unsupported("{"), 1),
            '}' => (Tok::Unsupported("}"), 1),
            '#' => return Err(unsupported(at, "comments")),
            '\n' | '\r' => return Err(unsupported(at, "multi-line source")),
            '\'' | '"' => {
                let tok = self.string(c)?;
                return Ok(Token { tok, at });
            }
            '.' if matches!(two(self), Some(d) if d.is_ascii_digit()) => {
                let tok = self.number()?;
                return Ok(Token { tok, at });
            }
            '.' => (Tok::Dot, 1),
            c if c.is_ascii_digit() => {
                let tok = self.number()?;
                return Ok(Token { tok, at });
            }
            c if c.is_alphabetic() || c == '_' => {
                while matches!(self.peek(0), Some(c) if c.is_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let ident: String = self.chars[at..self.pos].iter().collect();
                if matches!(self.peek(0), Some('\'' | '"')) {
                    return Err(unsupported(at, format!("string prefix '{ident}'")));
                }
                return Ok(Token {
                    tok: Tok::Ident(ident),
                    at,
                });
            }
            other => return Err(parse_error(at, format!("unexpected character {other:?}"))),
        };
        self.pos += width;
        Ok(Token { tok, at })
    }
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, EvalError> {
    let chars: Vec<char> = source.chars().collect();
    if chars.len() > MAX_SOURCE_CHARS {
        return Err(unsupported(
            MAX_SOURCE_CHARS,
            format!("source longer than {MAX_SOURCE_CHARS} characters"),
        ));
    }
    let mut lexer = Lexer { chars, pos: 0 };
    let mut out = Vec::new();
    loop {
        let t = lexer.next()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}
