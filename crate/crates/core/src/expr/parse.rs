//! Recursive-descent parser for the metric / conformal-factor DSL.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := number | ident | '(' expr ')' | func '(' expr ')'
//! exponent := int | '-' int | '(' '-'? int ('/' int)? ')'
//! ```
//!
//! Identifiers `t<a>`, `x<i>` and `y_<i>_<a>` (one-based) are jet
//! coordinates; `pi` is a constant; anything else is a named parameter.

use thiserror::Error;

use super::{Expr, Func, Rational, Var};
use crate::dims::Dims;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdent { name: String, line: usize, col: usize },
    #[error("index out of range at {line}:{col}: {msg}")]
    IndexOutOfRange { msg: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

impl Lexer {
    fn new(src: &str) -> Result<Lexer, ParseError> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let (mut line, mut col) = (1usize, 1usize);
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            if c == '\n' {
                line += 1;
                col = 1;
                k += 1;
                continue;
            }
            if c.is_whitespace() {
                col += 1;
                k += 1;
                continue;
            }
            let start = (line, col);
            if c.is_ascii_digit() || c == '.' {
                let mut s = String::new();
                while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                    s.push(chars[k]);
                    k += 1;
                }
                if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                    let mut j = k + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        s.extend(&chars[k..j]);
                        k = j;
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            s.push(chars[k]);
                            k += 1;
                        }
                    }
                }
                let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    line: start.0,
                    col: start.1,
                    msg: format!("malformed number `{}`", s),
                })?;
                col += s.chars().count();
                toks.push((Tok::Num(v, s), start.0, start.1));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                    s.push(chars[k]);
                    k += 1;
                }
                col += s.chars().count();
                toks.push((Tok::Ident(s), start.0, start.1));
            } else if "+-*/^()".contains(c) {
                toks.push((Tok::Op(c), line, col));
                col += 1;
                k += 1;
            } else {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{}`", c),
                });
            }
        }
        toks.push((Tok::End, line, col));
        Ok(Lexer { toks })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    dims: Dims,
    params: Option<&'a [&'a str]>,
}

enum Ident {
    Coord(Var),
    Pi,
    Param,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].1, self.toks[self.pos].2)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`, found {}", c, describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    acc = acc.div(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let r = self.exponent()?;
            return Ok(base.powr(r));
        }
        Ok(base)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        match self.bump() {
            Tok::Num(v, s) if v.fract() == 0.0 && !s.contains('.') && !s.contains('e') => {
                Ok(v as i64)
            }
            t => Err(self.err(format!(
                "exponent must be an integer or rational constant, found {}",
                describe(&t)
            ))),
        }
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        match self.peek() {
            Tok::Op('(') => {
                self.bump();
                let sign = if *self.peek() == Tok::Op('-') {
                    self.bump();
                    -1
                } else {
                    1
                };
                let num = sign * self.int()?;
                let den = if *self.peek() == Tok::Op('/') {
                    self.bump();
                    self.int()?
                } else {
                    1
                };
                if den == 0 {
                    return Err(self.err("zero denominator in exponent"));
                }
                self.expect(')')?;
                Ok(Rational::new(num, den))
            }
            Tok::Op('-') => {
                self.bump();
                Ok(Rational::int(-self.int()?))
            }
            _ => Ok(Rational::int(self.int()?)),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::Num(v, _) => Ok(Expr::constant(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::Op('(') {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: format!("function `{}` needs a parenthesized argument", name),
                        });
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(f, &arg));
                }
                match self.classify(&name, line, col)? {
                    Ident::Coord(v) => Ok(Expr::var(v)),
                    Ident::Pi => Ok(Expr::constant(std::f64::consts::PI)),
                    Ident::Param => Ok(Expr::param(&name)),
                }
            }
            t => Err(ParseError::Syntax {
                line,
                col,
                msg: format!("unexpected {}", describe(&t)),
            }),
        }
    }

    fn classify(&self, name: &str, line: usize, col: usize) -> Result<Ident, ParseError> {
        let range_err = |msg: String| ParseError::IndexOutOfRange { msg, line, col };
        let index = |s: &str| -> Option<usize> {
            if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) {
                s.parse().ok()
            } else {
                None
            }
        };
        if name == "pi" {
            return Ok(Ident::Pi);
        }
        if let Some(rest) = name.strip_prefix('t') {
            if let Some(a) = index(rest) {
                if a == 0 || a > self.dims.p {
                    return Err(range_err(format!(
                        "temporal index {} in `{}` outside 1..={}",
                        a, name, self.dims.p
                    )));
                }
                return Ok(Ident::Coord(Var::T(a - 1)));
            }
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Some(i) = index(rest) {
                if i == 0 || i > self.dims.n {
                    return Err(range_err(format!(
                        "spatial index {} in `{}` outside 1..={}",
                        i, name, self.dims.n
                    )));
                }
                return Ok(Ident::Coord(Var::X(i - 1)));
            }
        }
        if let Some(rest) = name.strip_prefix("y_") {
            let mut parts = rest.split('_');
            if let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) {
                if let (Some(i), Some(al)) = (index(a), index(b)) {
                    if i == 0 || i > self.dims.n {
                        return Err(range_err(format!(
                            "spatial index {} in `{}` exceeds n={}",
                            i, name, self.dims.n
                        )));
                    }
                    if al == 0 || al > self.dims.p {
                        return Err(range_err(format!(
                            "temporal index {} in `{}` exceeds p={}",
                            al, name, self.dims.p
                        )));
                    }
                    return Ok(Ident::Coord(Var::Y { i: i - 1, a: al - 1 }));
                }
            }
        }
        match self.params {
            Some(allowed) if !allowed.contains(&name) => Err(ParseError::UnknownIdent {
                name: name.to_string(),
                line,
                col,
            }),
            _ => Ok(Ident::Param),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(_, s) => format!("number `{}`", s),
        Tok::Ident(s) => format!("identifier `{}`", s),
        Tok::Op(c) => format!("`{}`", c),
        Tok::End => "end of input".to_string(),
    }
}

fn run(src: &str, dims: Dims, params: Option<&[&str]>) -> Result<Expr, ParseError> {
    let lexer = Lexer::new(src)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
        dims,
        params,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

/// Parses `src`; free identifiers become named parameters.
pub fn parse(src: &str, dims: Dims) -> Result<Expr, ParseError> {
    run(src, dims, None)
}

/// Parses `src`, rejecting identifiers that are neither coordinates nor in
/// `params`.
pub fn parse_with_params(src: &str, dims: Dims, params: &[&str]) -> Result<Expr, ParseError> {
    run(src, dims, Some(params))
}
