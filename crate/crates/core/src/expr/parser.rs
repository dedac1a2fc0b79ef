//! Recursive-descent parser for component expressions.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)?
//! exponent := "-"? integer ("^" exponent)?
//! atom     := number | ident | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus (`-u1^2` is `-(u1^2)`) and is right
//! associative over integer exponents (`u1^2^3` is `u1^8`).

use crate::error::ParseError;
use crate::expr::ast::{Expr, Func};

/// Variable naming accepted by the parser: identifiers are `prefix` + index
/// for any listed prefix, with `1 <= index <= dim`.
#[derive(Clone, Debug)]
pub struct VarScope {
    pub prefixes: Vec<String>,
    pub dim: usize,
}

impl VarScope {
    pub fn new(dim: usize, prefixes: &[&str]) -> Self {
        VarScope { prefixes: prefixes.iter().map(|s| s.to_string()).collect(), dim }
    }

    /// `u1..un` plus the chart's own label.
    pub fn chart(dim: usize, label: &str) -> Self {
        let mut p = vec!["u"];
        if label != "u" {
            p.push(label);
        }
        VarScope::new(dim, &p)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("'{text}'"),
                })?;
                toks.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["expression".into()],
                    found: format!("'{ch}'"),
                });
            }
        };
        toks.push((start, tok));
        i += 1;
    }
    toks.push((src.len(), Tok::End));
    Ok(toks)
}

/// Errors that can come out of [`parse_expr`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown variable '{name}' at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("function '{name}' takes 1 argument, got {got} (offset {offset})")]
    Arity { name: String, got: usize, offset: usize },
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    scope: &'a VarScope,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&str]) -> ExprError {
        ExprError::Parse(ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ExprError> {
        let start = self.offset();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let k = match self.peek() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() < 1e6 => *v as i64,
            _ => return Err(self.fail(&["integer exponent"])),
        };
        self.bump();
        let mut k = if negative { -k } else { k };
        if *self.peek() == Tok::Caret {
            self.bump();
            let inner = self.exponent()?;
            if inner < 0 {
                return Err(ExprError::Parse(ParseError {
                    offset: start,
                    expected: vec!["nonnegative nested exponent".into()],
                    found: format!("{k}^{inner}"),
                }));
            }
            k = k.checked_pow(inner as u32).unwrap_or(i64::MAX);
        }
        i32::try_from(k).map_err(|_| {
            ExprError::Parse(ParseError {
                offset: start,
                expected: vec!["exponent in i32 range".into()],
                found: k.to_string(),
            })
        })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.fail(&["')'", "operator"]));
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.fail(&["'('"]));
                    }
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return Err(self.fail(&["')'", "','", "operator"]));
                    }
                    self.bump();
                    if args.len() != 1 {
                        return Err(ExprError::Arity { name, got: args.len(), offset });
                    }
                    return Ok(Expr::Call(f, Box::new(args.pop().unwrap())));
                }
                self.variable(&name, offset)
            }
            _ => Err(self.fail(&["number", "variable", "function", "'('", "'-'"])),
        }
    }

    fn variable(&self, name: &str, offset: usize) -> Result<Expr, ExprError> {
        let unknown = || ExprError::UnknownVariable { name: name.to_string(), offset };
        let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?;
        let (prefix, digits) = name.split_at(split);
        if !self.scope.prefixes.iter().any(|p| p == prefix) || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let idx: usize = digits.parse().map_err(|_| unknown())?;
        if idx == 0 || idx > self.scope.dim {
            return Err(unknown());
        }
        Ok(Expr::Var(idx - 1))
    }
}

/// Parse a component expression within a variable scope.
pub fn parse_expr(src: &str, scope: &VarScope) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, scope };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.fail(&["operator", "end of input"]));
    }
    Ok(e)
}
