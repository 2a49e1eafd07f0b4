//! Recursive-descent parser for the holomorphic expression syntax.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" int)?
//! base   := number | "i" | var | "(" expr ")" | func "(" expr ")" | "-" base
//! func   := "exp" | "log" | "sqrt"
//! var    := "z" int                  (one-based, bounded by the arity)
//! number := decimal literal, optional e-exponent, optional "i" suffix
//! ```
//!
//! Whitespace is insignificant. Integer powers are nonnegative. The only
//! ambiguity guard worth noting: an `e` directly after digits starts an
//! exponent only when followed by `[+-]?digit`, so `2*exp(z1)` lexes as
//! expected while `2e-3` is a single literal.

use super::expr::{Expr, HoloFunction};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num {
        value: f64,
        imag: bool,
        integral: bool,
    },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<Option<(usize, Tok)>> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.src[self.pos];
        let tok = match b {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => self.lex_number(start)?,
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .expect("ascii slice")
                    .to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            other => {
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((start, tok)))
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok> {
        let mut end = self.pos;
        let mut integral = true;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
        }
        if end < self.src.len() && self.src[end] == b'.' {
            integral = false;
            end += 1;
            while end < self.src.len() && self.src[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end == self.pos || (end == self.pos + 1 && self.src[self.pos] == b'.') {
            return Err(Error::Syntax {
                position: start,
                message: "malformed number".into(),
            });
        }
        // Exponent part only when `e` is followed by an (optionally signed)
        // digit, so identifiers like `exp` survive after a literal.
        if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
            let mut probe = end + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                integral = false;
                end = probe + 1;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[self.pos..end]).expect("ascii slice");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("cannot parse number `{text}`"),
        })?;
        self.pos = end;
        // Imaginary suffix: an `i` not followed by another identifier char.
        let mut imag = false;
        if self.pos < self.src.len() && self.src[self.pos] == b'i' {
            let after = self.pos + 1;
            if after >= self.src.len()
                || !(self.src[after].is_ascii_alphanumeric() || self.src[after] == b'_')
            {
                imag = true;
                self.pos = after;
            }
        }
        Ok(Tok::Num {
            value,
            imag,
            integral,
        })
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut lexer = Lexer {
        src: src.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    while let Some(t) = lexer.next_token()? {
        out.push(t);
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    arity: usize,
    prefix: char,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.pos(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Arc<Expr>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = Arc::new(Expr::Add(acc, self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = Arc::new(Expr::Sub(acc, self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Arc<Expr>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = Arc::new(Expr::Mul(acc, self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    acc = Arc::new(Expr::Div(acc, self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Arc<Expr>> {
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let p = self.pos();
            match self.bump() {
                Some(Tok::Num {
                    value,
                    imag: false,
                    integral: true,
                }) if value >= 0.0 && value <= u32::MAX as f64 => {
                    Ok(Arc::new(Expr::Pow(base, value as u32)))
                }
                _ => Err(Error::Syntax {
                    position: p,
                    message: "power must be a nonnegative integer".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Arc<Expr>> {
        let p = self.pos();
        match self.bump() {
            Some(Tok::Num { value, imag, .. }) => {
                let c = if imag {
                    Complex64::new(0.0, value)
                } else {
                    Complex64::new(value, 0.0)
                };
                Ok(Arc::new(Expr::Const(c)))
            }
            Some(Tok::Minus) => Ok(Arc::new(Expr::Neg(self.base()?))),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Syntax {
                        position: self.end,
                        message: "missing closing parenthesis".into(),
                    }),
                }
            }
            Some(Tok::Ident(name)) => self.ident(&name, p),
            _ => Err(Error::Syntax {
                position: p,
                message: "expected a number, variable, function, or parenthesis".into(),
            }),
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Arc<Expr>> {
        match name {
            "i" => return Ok(Arc::new(Expr::Const(Complex64::new(0.0, 1.0)))),
            "exp" | "log" | "sqrt" => {
                match self.bump() {
                    Some(Tok::LParen) => {}
                    _ => {
                        return Err(Error::Syntax {
                            position: at,
                            message: format!("`{name}` must be followed by `(`"),
                        })
                    }
                }
                let arg = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => {}
                    _ => {
                        return Err(Error::Syntax {
                            position: self.end,
                            message: format!("unclosed `{name}(`"),
                        })
                    }
                }
                return Ok(Arc::new(match name {
                    "exp" => Expr::Exp(arg),
                    "log" => Expr::Log(arg),
                    _ => Expr::Sqrt(arg),
                }));
            }
            _ => {}
        }
        // Variables: prefix followed by a one-based index.
        let mut chars = name.chars();
        if chars.next() == Some(self.prefix) {
            let rest = chars.as_str();
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let k: usize = rest.parse().map_err(|_| Error::Syntax {
                    position: at,
                    message: format!("bad variable index in `{name}`"),
                })?;
                if k == 0 || k > self.arity {
                    return Err(Error::Arity(format!(
                        "variable `{name}` out of range for arity {}",
                        self.arity
                    )));
                }
                return Ok(Arc::new(Expr::Var(k - 1)));
            }
        }
        Err(Error::UnknownIdentifier(name.to_string()))
    }
}

pub(crate) fn parse_with_prefix(text: &str, arity: usize, prefix: char) -> Result<HoloFunction> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        arity,
        prefix,
        end: text.len(),
    };
    let expr = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(p.err("trailing input after a complete expression"));
    }
    Ok(HoloFunction::from_expr(expr, arity, prefix))
}

impl HoloFunction {
    /// Parse a holomorphic expression in variables z1..z{arity}.
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        parse_with_prefix(text, arity, 'z')
    }
}
