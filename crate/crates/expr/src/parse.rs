//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := '-' exponent | power          (right associative)
//! primary  := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Literals are read as exact rationals. `a - b` becomes `a + (-b)`.

use num::bigint::BigInt;
use num::{One, Zero};
use thiserror::Error;

use crate::ast::{Expr, Rational, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. } | ParseError::UnknownFunction { offset, .. } => Some(*offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(_) => "number".into(),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lexeme = &text[start..i];
                let value = parse_decimal(lexeme).ok_or_else(|| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lexeme}`"),
                })?;
                out.push((start, Token::Number(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `.5`.
pub(crate) fn parse_decimal(lexeme: &str) -> Option<Rational> {
    let (int_part, frac_part) = match lexeme.split_once('.') {
        Some((a, b)) => (a, b),
        None => (lexeme, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let mut denom = BigInt::one();
    for _ in 0..frac_part.len() {
        denom *= 10;
    }
    Some(Rational::new(numer, denom))
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Some(Token::Slash) => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.bump();
            let exponent = self.exponent()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(-self.exponent()?);
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Token::Number(value)) => Ok(Expr::Num(value)),
            Some(Token::Ident(name)) => {
                if let Some(Token::LParen) = self.peek() {
                    let op = UnaryOp::from_function_name(&name).ok_or(ParseError::UnknownFunction { offset, name })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::unary(op, arg))
                } else {
                    Ok(Expr::sym(name))
                }
            }
            Some(Token::LParen) => {
                if let Some(value) = self.literal_in_parens() {
                    return Ok(Expr::Num(value));
                }
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(other) => {
                self.pos -= 1;
                Err(self.error(format!("unexpected {}", other.describe())))
            }
            None => Err(self.error("unexpected end of input")),
        }
    }

    /// `(-3)`, `(1/3)` and `(-1/3)` read as single constants, the forms in
    /// which non-decimal and negative constants are printed. Called just
    /// after the opening parenthesis.
    fn literal_in_parens(&mut self) -> Option<Rational> {
        let tok = |i: usize| self.tokens.get(self.pos + i).map(|t| &t.1);
        let (negative, start) = match tok(0) {
            Some(Token::Minus) => (true, 1),
            _ => (false, 0),
        };
        let Some(Token::Number(n)) = tok(start) else {
            return None;
        };
        let (value, len) = match (tok(start + 1), tok(start + 2), tok(start + 3)) {
            (Some(Token::RParen), _, _) => (n.clone(), start + 2),
            (Some(Token::Slash), Some(Token::Number(d)), Some(Token::RParen))
                if n.is_integer() && d.is_integer() && !d.is_zero() =>
            {
                (n / d, start + 4)
            }
            _ => return None,
        };
        if !negative && len == 2 {
            return None;
        }
        self.pos += len;
        Some(if negative { -value } else { value })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token::RParen) => {
                self.bump();
                Ok(())
            }
            Some(other) => Err(self.error(format!("expected `)`, found {}", other.describe()))),
            None => Err(self.error("expected `)`")),
        }
    }
}

/// Parse expression source text.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(parser.error(format!("unexpected {}", tok.describe())));
    }
    Ok(expr)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
