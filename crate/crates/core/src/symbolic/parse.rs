//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! base     := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '-' factor
//! exponent := NUMBER | '(' expr ')'
//! ```
//!
//! Numbers are integers, decimals or (in exponent position) `p/q`; all are
//! converted to exact rationals. A literal divided by a literal folds into a
//! single rational constant, so printed rationals such as `1/2*x` re-parse to
//! the same tree.

use num_bigint::BigInt;
use num_traits::Zero;

use super::expr::{CoordinateSystem, Expr, Func, Node, Rational};
use super::normal::normalize;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((Tok::Num(decimal(&src[start..i], start)?), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn decimal(text: &str, position: usize) -> Result<Rational> {
    let bad = || Error::Syntax {
        position,
        message: format!("malformed number `{text}`"),
    };
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(Rational::new(numer, denom))
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    coords: &'a CoordinateSystem,
}

/// A parsed factor; `grouped` marks an explicit parenthesised group.
struct Factor {
    expr: Expr,
    grouped: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn position(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(self.term()?.negate());
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors: Vec<Expr> = Vec::new();
        push_factor(&mut factors, self.factor()?);
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    push_factor(&mut factors, self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    // literal / literal folds into one rational
                    if factors.len() == 1 {
                        if let (Some(a), Some(b)) = (factors[0].as_const(), rhs.expr.as_const()) {
                            if b.is_zero() {
                                return self.error("division by zero constant");
                            }
                            factors[0] = Expr::constant(a / b);
                            continue;
                        }
                    }
                    factors.push(rhs.expr.recip());
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn factor(&mut self) -> Result<Factor> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        if *self.peek() == Tok::Caret {
            return self.error("chained exponents need parentheses");
        }
        Ok(Factor {
            expr: Expr::pow(base.expr, exponent),
            grouped: false,
        })
    }

    fn exponent(&mut self) -> Result<Rational> {
        match self.bump() {
            Tok::Num(n) => {
                // `p/q` is a single rational literal in exponent position
                if *self.peek() == Tok::Slash {
                    if let Tok::Num(d) = &self.toks[self.pos + 1].0 {
                        let d = d.clone();
                        if d.is_zero() {
                            return self.error("zero denominator in exponent");
                        }
                        self.bump();
                        self.bump();
                        return Ok(n / d);
                    }
                }
                Ok(n)
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                match normalize(&e).as_const() {
                    Some(c) => Ok(c.clone()),
                    None => self.error("exponent must be a rational constant"),
                }
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.error("expected exponent")
            }
        }
    }

    fn base(&mut self) -> Result<Factor> {
        let position = self.position();
        match self.bump() {
            Tok::Num(n) => Ok(Factor {
                expr: Expr::constant(n),
                grouped: false,
            }),
            Tok::Minus => {
                let inner = self.factor()?;
                Ok(Factor {
                    expr: inner.expr.negate(),
                    grouped: false,
                })
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Factor {
                    expr: e,
                    grouped: true,
                })
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(Error::Syntax {
                            position,
                            message: format!("unknown function `{name}`"),
                        });
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Factor {
                        expr: Expr::func(func, arg),
                        grouped: false,
                    });
                }
                if !self.coords.contains(&name) {
                    return Err(Error::UnknownVariable(name));
                }
                Ok(Factor {
                    expr: Expr::var(name),
                    grouped: false,
                })
            }
            Tok::End => {
                self.pos = self.toks.len() - 1;
                self.error("unexpected end of input")
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                let _ = other;
                self.error("unexpected token")
            }
        }
    }
}

fn push_factor(factors: &mut Vec<Expr>, f: Factor) {
    if !f.grouped {
        if let Node::Product(inner) = f.expr.node() {
            factors.extend(inner.iter().cloned());
            return;
        }
    }
    factors.push(f.expr);
}

/// Parses `source` against `coords`. Unknown names are rejected.
pub fn parse_expr(source: &str, coords: &CoordinateSystem) -> Result<Expr> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        coords,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => p.error("unbalanced `)`"),
        _ => p.error("unexpected trailing input"),
    }
}
