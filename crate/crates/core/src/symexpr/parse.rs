//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := '-'* base ('^' rational)?
//! base     := number | symbol | '(' expr ')'
//! rational := integer | '(' integer '/' integer ')'
//! ```
//!
//! Symbols are restricted to the chart coordinates
//! `x, y, y1, y2, y3, a10, a11, a44`.

use super::{int, rat, Expr, Rat};
use thiserror::Error;

pub const KNOWN_SYMBOLS: &[&str] = &["x", "y", "y1", "y2", "y3", "a10", "a11", "a44"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {0}: {1}")]
    Syntax(usize, String),
    #[error("unknown symbol `{1}` at offset {0}")]
    UnknownSymbol(usize, String),
    #[error("malformed exponent at offset {0}")]
    MalformedExponent(usize),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError::Syntax(
            p.pos,
            format!("unexpected character `{}`", p.src[p.pos] as char),
        ));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::mul(vec![acc, self.factor()?]);
            } else if self.eat(b'/') {
                acc = acc.div(self.factor()?);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let exp = self.rational()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(ParseError::Syntax(self.pos, "expected `)`".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.symbol(),
            Some(c) => Err(ParseError::Syntax(
                self.pos,
                format!("unexpected character `{}`", c as char),
            )),
            None => Err(ParseError::Syntax(self.pos, "unexpected end of input".into())),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let int_part: i64 = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::Syntax(start, "integer literal too large".into()))?;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let fstart = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == fstart {
                return Err(ParseError::Syntax(self.pos, "expected digits after `.`".into()));
            }
            let frac: i64 = std::str::from_utf8(&self.src[fstart..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| ParseError::Syntax(fstart, "fraction too long".into()))?;
            let scale = 10i64.pow((self.pos - fstart) as u32);
            self.skip_ws();
            return Ok(Expr::Rat(int(int_part) + rat(frac, scale)));
        }
        self.skip_ws();
        Ok(Expr::num(int_part))
    }

    fn symbol(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if !KNOWN_SYMBOLS.contains(&name) {
            return Err(ParseError::UnknownSymbol(start, name.to_string()));
        }
        self.skip_ws();
        Ok(Expr::sym(name))
    }

    /// `integer | '(' integer '/' integer ')'`, with an optional leading sign.
    fn rational(&mut self) -> Result<Rat, ParseError> {
        let at = self.pos;
        if self.eat(b'(') {
            let n = self.signed_int().ok_or(ParseError::MalformedExponent(at))?;
            self.skip_ws();
            if !self.eat(b'/') {
                return Err(ParseError::MalformedExponent(self.pos));
            }
            let d = self.signed_int().ok_or(ParseError::MalformedExponent(self.pos))?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(ParseError::MalformedExponent(self.pos));
            }
            if d == 0 {
                return Err(ParseError::MalformedExponent(at));
            }
            Ok(rat(n, d))
        } else {
            let n = self.signed_int().ok_or(ParseError::MalformedExponent(at))?;
            self.skip_ws();
            Ok(int(n))
        }
    }

    fn signed_int(&mut self) -> Option<i64> {
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let v: i64 = std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()?;
        Some(if neg { -v } else { v })
    }
}
