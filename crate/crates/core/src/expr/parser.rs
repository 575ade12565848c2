//! Recursive-descent parser for potentials.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' number ('^' integer)? | '-' unary | factor
//! factor := atom ('^' integer)?
//! atom   := number | 'z' index | 'zbar' index
//!         | ('exp' | 'log' | 're' | 'im') '(' expr ')' | '(' expr ')'
//! ```
//!
//! A minus sign directly in front of a numeric literal in unary position is
//! part of the literal, so `-2^2` is `(-2)^2`.

use thiserror::Error;

use super::{Node, PotentialExpr, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    InvalidDimension,
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnmatchedParen,
    UnknownIdentifier(String),
    ZeroIndex,
    IndexOutOfRange { index: usize, dim: usize },
    NonIntegerExponent,
    NegativeExponent,
    InvalidNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at {span}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::EmptyInput => "empty input".into(),
        ParseErrorKind::InvalidDimension => "chart dimension must be at least 1".into(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::UnexpectedToken { found, expected } => {
            format!("expected {expected}, found {found:?}")
        }
        ParseErrorKind::UnexpectedEnd { expected } => format!("expected {expected}, found end of input"),
        ParseErrorKind::UnmatchedParen => "unmatched parenthesis".into(),
        ParseErrorKind::UnknownIdentifier(s) => format!("unknown identifier {s:?}"),
        ParseErrorKind::ZeroIndex => "variable indices start at 1".into(),
        ParseErrorKind::IndexOutOfRange { index, dim } => {
            format!("variable index {index} exceeds chart dimension {dim}")
        }
        ParseErrorKind::NonIntegerExponent => "exponent must be a non-negative integer".into(),
        ParseErrorKind::NegativeExponent => "negative exponents are not supported".into(),
        ParseErrorKind::InvalidNumber => "malformed number".into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number { value: f64, integral: bool },
    Var(usize),
    ConjVar(usize),
    Func(Func),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Caret,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Log,
    Re,
    Im,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn err(kind: ParseErrorKind, start: usize, end: usize) -> ParseError {
    ParseError { kind, span: SourceSpan::new(start, end) }
}

fn lex(text: &str, dim: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let single = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push(Token { tok, span: SourceSpan::new(start, i) });
            continue;
        }
        if b.is_ascii_digit() || b == b'.' {
            let mut integral = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integral = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| err(ParseErrorKind::InvalidNumber, start, i))?;
            if !value.is_finite() {
                return Err(err(ParseErrorKind::InvalidNumber, start, i));
            }
            out.push(Token { tok: Tok::Number { value, integral }, span: SourceSpan::new(start, i) });
            continue;
        }
        if b.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "exp" => Tok::Func(Func::Exp),
                "log" => Tok::Func(Func::Log),
                "re" => Tok::Func(Func::Re),
                "im" => Tok::Func(Func::Im),
                "z" | "zbar" => {
                    let digits_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if digits_start == i {
                        return Err(err(ParseErrorKind::UnknownIdentifier(word.to_string()), start, i));
                    }
                    let index: usize = text[digits_start..i]
                        .parse()
                        .map_err(|_| err(ParseErrorKind::InvalidNumber, digits_start, i))?;
                    if index == 0 {
                        return Err(err(ParseErrorKind::ZeroIndex, start, i));
                    }
                    if index > dim {
                        return Err(err(ParseErrorKind::IndexOutOfRange { index, dim }, start, i));
                    }
                    if word == "z" {
                        Tok::Var(index - 1)
                    } else {
                        Tok::ConjVar(index - 1)
                    }
                }
                _ => return Err(err(ParseErrorKind::UnknownIdentifier(word.to_string()), start, i)),
            };
            out.push(Token { tok, span: SourceSpan::new(start, i) });
            continue;
        }
        let ch = text[start..].chars().next().unwrap();
        return Err(err(ParseErrorKind::UnexpectedChar(ch), start, start + ch.len_utf8()));
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn end_span(&self) -> SourceSpan {
        SourceSpan::new(self.text.len(), self.text.len())
    }

    fn unexpected(&self, tok: &Token, expected: &'static str) -> ParseError {
        ParseError {
            kind: ParseErrorKind::UnexpectedToken {
                found: self.text[tok.span.start..tok.span.end].to_string(),
                expected,
            },
            span: tok.span,
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Star) = self.peek().map(|t| &t.tok) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Some(Tok::Minus) = self.peek().map(|t| &t.tok) {
            if let Some(Tok::Number { value, .. }) = self.peek_at(1).map(|t| &t.tok) {
                let value = *value;
                self.pos += 2;
                return self.power_suffix(Node::Const(-value));
            }
            self.bump();
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        let atom = self.atom()?;
        self.power_suffix(atom)
    }

    fn power_suffix(&mut self, base: Node) -> Result<Node, ParseError> {
        if let Some(Tok::Caret) = self.peek().map(|t| &t.tok) {
            self.bump();
            let Some(tok) = self.bump() else {
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedEnd { expected: "integer exponent" },
                    span: self.end_span(),
                });
            };
            return match tok.tok {
                Tok::Number { value, integral: true } if value <= u32::MAX as f64 => {
                    Ok(Node::Pow(Box::new(base), value as u32))
                }
                Tok::Number { .. } => Err(ParseError { kind: ParseErrorKind::NonIntegerExponent, span: tok.span }),
                Tok::Minus => {
                    let end = self.peek().map_or(tok.span.end, |t| t.span.end);
                    Err(err(ParseErrorKind::NegativeExponent, tok.span.start, end))
                }
                _ => Err(ParseError { kind: ParseErrorKind::NonIntegerExponent, span: tok.span }),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.bump() else {
            return Err(ParseError {
                kind: ParseErrorKind::UnexpectedEnd { expected: "operand" },
                span: self.end_span(),
            });
        };
        match tok.tok {
            Tok::Number { value, .. } => Ok(Node::Const(value)),
            Tok::Var(i) => Ok(Node::Var(i)),
            Tok::ConjVar(i) => Ok(Node::ConjVar(i)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.close(&tok)?;
                Ok(inner)
            }
            Tok::Func(f) => {
                match self.bump() {
                    Some(Token { tok: Tok::LParen, span }) => {
                        let inner = self.expr()?;
                        self.close(&Token { tok: Tok::LParen, span })?;
                        let inner = Box::new(inner);
                        Ok(match f {
                            Func::Exp => Node::Exp(inner),
                            Func::Log => Node::Log(inner),
                            Func::Re => Node::Re(inner),
                            Func::Im => Node::Im(inner),
                        })
                    }
                    Some(other) => Err(self.unexpected(&other, "'(' after function name")),
                    None => Err(ParseError {
                        kind: ParseErrorKind::UnexpectedEnd { expected: "'(' after function name" },
                        span: self.end_span(),
                    }),
                }
            }
            _ => Err(self.unexpected(&tok, "operand")),
        }
    }

    fn close(&mut self, open: &Token) -> Result<(), ParseError> {
        match self.bump() {
            Some(Token { tok: Tok::RParen, .. }) => Ok(()),
            Some(other) => Err(self.unexpected(&other, "')'")),
            None => Err(ParseError { kind: ParseErrorKind::UnmatchedParen, span: open.span }),
        }
    }
}

/// Parse `text` as a potential on a chart of dimension `dim`.
pub fn parse(text: &str, dim: usize) -> Result<PotentialExpr, ParseError> {
    if dim == 0 {
        return Err(err(ParseErrorKind::InvalidDimension, 0, 0));
    }
    let tokens = lex(text, dim)?;
    if tokens.is_empty() {
        return Err(err(ParseErrorKind::EmptyInput, 0, text.len()));
    }
    let mut p = Parser { text, tokens, pos: 0 };
    let root = p.expr()?;
    if let Some(tok) = p.peek().cloned() {
        if tok.tok == Tok::RParen {
            return Err(ParseError { kind: ParseErrorKind::UnmatchedParen, span: tok.span });
        }
        return Err(p.unexpected(&tok, "operator or end of input"));
    }
    Ok(PotentialExpr { root, dim })
}
