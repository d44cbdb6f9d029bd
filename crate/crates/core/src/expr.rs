//! Text form of divisor expressions, e.g. `"F1 + 2E1 + 2E3 + 3E4"`,
//! `"2(h - e3 - e5 - e6)"` or `"-F2 + E1 - E2"`.
//!
//! Symbols are resolved as follows: `K` is the canonical class, `h` and
//! `e<k>` are basis vectors, anything else names a curve. Coefficients are
//! exact rationals written `p` or `p/q`, optionally followed by `*`.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::qlattice::{fmt_rational, BasisLabel, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Canonical,
    Basis(BasisLabel),
    Curve(String),
}

impl Symbol {
    pub fn classify(name: &str) -> Symbol {
        if name == "K" {
            Symbol::Canonical
        } else if let Ok(l) = name.parse::<BasisLabel>() {
            Symbol::Basis(l)
        } else {
            Symbol::Curve(name.to_string())
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Canonical => write!(f, "K"),
            Symbol::Basis(l) => write!(f, "{l}"),
            Symbol::Curve(c) => write!(f, "{c}"),
        }
    }
}

/// A formal rational combination of symbols. Repeated symbols are kept
/// separate; evaluation sums them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassExpr {
    pub terms: Vec<(Rational, Symbol)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expression {input:?}, column {column}: {message}")]
pub struct ExprError {
    pub input: String,
    pub column: usize,
    pub message: String,
}

impl ClassExpr {
    pub fn parse(input: &str) -> Result<ClassExpr, ExprError> {
        let mut p = Parser {
            src: input,
            bytes: input.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn curve_names(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().filter_map(|(_, s)| match s {
            Symbol::Curve(c) => Some(c.as_str()),
            _ => None,
        })
    }

    fn extend_scaled(&mut self, other: ClassExpr, k: &Rational) {
        self.terms
            .extend(other.terms.into_iter().map(|(c, s)| (c * k, s)));
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, s)) in self.terms.iter().enumerate() {
            let neg = *c < Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mag.is_one() {
                write!(f, "{s}")?;
            } else {
                write!(f, "{} {s}", fmt_rational(&mag))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> ExprError {
        ExprError {
            input: self.src.to_string(),
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ClassExpr, ExprError> {
        let mut out = ClassExpr::default();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    Rational::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -Rational::one()
                }
                _ if first => Rational::one(),
                _ => break,
            };
            first = false;
            let (coef, body) = self.term()?;
            out.extend_scaled(body, &(sign * coef));
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Rational, ClassExpr), ExprError> {
        let coef = self.number()?;
        if coef.is_some() && self.peek() == Some(b'*') {
            self.pos += 1;
        }
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok((coef.unwrap_or_else(Rational::one), inner))
            }
            Some(b) if is_ident_start(b) => {
                let name = self.ident();
                let sym = Symbol::classify(&name);
                Ok((
                    coef.unwrap_or_else(Rational::one),
                    ClassExpr {
                        terms: vec![(Rational::one(), sym)],
                    },
                ))
            }
            // A bare number is only meaningful as the zero class.
            _ => match coef {
                Some(c) if c.is_zero() => Ok((c, ClassExpr::default())),
                Some(_) => Err(self.err("a nonzero constant is not a divisor class")),
                None => Err(self.err("expected a term")),
            },
        }
    }

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.src[start..self.pos])
    }

    fn number(&mut self) -> Result<Option<Rational>, ExprError> {
        self.skip_ws();
        let Some(n) = self.digits() else {
            return Ok(None);
        };
        let n: num_bigint::BigInt = n.parse().expect("digits");
        if self.bytes.get(self.pos) == Some(&b'/') {
            self.pos += 1;
            let Some(d) = self.digits() else {
                return Err(self.err("expected denominator"));
            };
            let d: num_bigint::BigInt = d.parse().expect("digits");
            if d.is_zero() {
                return Err(self.err("zero denominator"));
            }
            return Ok(Some(Rational::new(n, d)));
        }
        Ok(Some(Rational::from_integer(n)))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.bytes.len() && is_ident_char(self.bytes[self.pos]) {
            self.pos += 1;
        }
        self.src[start..self.pos].to_string()
    }
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'\''
}

/// Whether `name` is usable as a curve name inside expressions.
pub fn is_valid_curve_name(name: &str) -> bool {
    let mut bytes = name.bytes();
    matches!(bytes.next(), Some(b) if is_ident_start(b))
        && bytes.all(is_ident_char)
        && matches!(Symbol::classify(name), Symbol::Curve(_))
}
