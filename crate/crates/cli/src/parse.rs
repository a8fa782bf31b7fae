//! Surface syntax for single-component densities and scalar differential operators.
//!
//! ```text
//! input  := ["D:"] sum
//! sum    := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ["^" ["-"] INT]
//! atom   := INT | "u" | "u_k" | "theta" | "theta_k" | "del" | "d(" sum ")" | "(" sum ")"
//! ```
//!
//! `del` is only available after the `D:` prefix. Negative powers are only
//! accepted where the algebra admits them (`u_1` in hat mode).

use std::fmt;

use jetcalc::{Algebra, DiffOperator, JetCoordinate, Rational, SuperPolynomial};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// A parsed input.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Density(SuperPolynomial),
    Operator(DiffOperator),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub token: String,
    pub expected: Vec<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {} at '{}'", self.column, self.message, self.token)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Sym(c) => write!(f, "{c}"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(text: &str, offset: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(ParseError {
                column: col,
                token: c.to_string(),
                expected: vec![],
                message: "unexpected character".into(),
            });
        }
    }
    out.push((Tok::End, offset + chars.len() + 1));
    Ok(out)
}

#[derive(Clone, Debug)]
enum Val {
    P(SuperPolynomial),
    Op(DiffOperator),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    alg: Algebra,
    operators: bool,
}

fn err(col: usize, tok: &Tok, expected: &[&str], message: &str) -> ParseError {
    ParseError {
        column: col,
        token: tok.to_string(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
        message: message.into(),
    }
}

const ATOM_START: &[&str] = &["integer", "u", "u_k", "theta", "theta_k", "d(", "("];

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        let (t, col) = self.bump();
        if t == Tok::Sym(c) {
            Ok(())
        } else {
            Err(err(col, &t, &[&c.to_string()], "unexpected token"))
        }
    }

    fn engine(&self, col: usize, e: jetcalc::Error) -> ParseError {
        let (t, _) = &self.toks[self.pos.saturating_sub(1)];
        err(col, t, &[], &e.to_string())
    }

    fn as_op(&self, v: Val, col: usize) -> Result<DiffOperator, ParseError> {
        match v {
            Val::Op(o) => Ok(o),
            Val::P(p) => DiffOperator::multiplication(p).map_err(|e| self.engine(col, e)),
        }
    }

    fn sum(&mut self) -> Result<Val, ParseError> {
        let mut acc = self.term()?;
        loop {
            let (t, col) = self.peek().clone();
            let neg = match t {
                Tok::Sym('+') => false,
                Tok::Sym('-') => true,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term()?;
            acc = match (acc, rhs) {
                (Val::P(a), Val::P(b)) => Val::P(if neg { &a - &b } else { &a + &b }),
                (a, b) => {
                    let (a, b) = (self.as_op(a, col)?, self.as_op(b, col)?);
                    Val::Op(if neg { &a - &b } else { &a + &b })
                }
            };
        }
    }

    fn term(&mut self) -> Result<Val, ParseError> {
        let mut acc = self.unary()?;
        loop {
            let (t, col) = self.peek().clone();
            match t {
                Tok::Sym('*') => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = match (acc, rhs) {
                        (Val::P(a), Val::P(b)) => Val::P(&a * &b),
                        (a, b) => {
                            let (a, b) = (self.as_op(a, col)?, self.as_op(b, col)?);
                            Val::Op(a.compose(&b))
                        }
                    };
                }
                Tok::Sym('/') => {
                    self.bump();
                    let (_, dcol) = self.peek().clone();
                    let rhs = self.unary()?;
                    let c = match &rhs {
                        Val::P(p) => p.as_constant(),
                        Val::Op(_) => None,
                    };
                    let Some(c) = c.filter(|c| !c.is_zero()) else {
                        return Err(err(dcol, &self.toks[self.pos - 1].0, &["nonzero constant"], "division by a non-constant"));
                    };
                    let inv = Rational::one() / c;
                    acc = match acc {
                        Val::P(a) => Val::P(a.scale(&inv)),
                        Val::Op(o) => Val::Op(o.scale(&inv)),
                    };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Val, ParseError> {
        if self.peek().0 == Tok::Sym('-') {
            self.bump();
            return Ok(match self.unary()? {
                Val::P(p) => Val::P(-&p),
                Val::Op(o) => Val::Op(-&o),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Val, ParseError> {
        let (_, base_col) = self.peek().clone();
        let base = self.atom()?;
        if self.peek().0 != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let neg = if self.peek().0 == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let (t, col) = self.bump();
        let Tok::Int(n) = t else {
            return Err(err(col, &t, &["integer"], "exponent must be an integer"));
        };
        let n: u32 = u32::try_from(&n).map_err(|_| err(col, &Tok::Int(n.clone()), &[], "exponent too large"))?;
        match base {
            Val::P(p) if !neg => Ok(Val::P(p.pow(n))),
            Val::P(p) => {
                let single = p.len() == 1 && p.terms().next().is_some_and(|(m, c)| c.is_one() && m.even().len() == 1 && m.odd_part().is_empty());
                let (m, _) = p.terms().next().filter(|_| single).ok_or_else(|| {
                    err(base_col, &self.toks[self.pos - 1].0, &[], "negative powers apply to a single variable")
                })?;
                let (v, e) = m.even()[0];
                let exp = -(e * n as i32);
                self.alg.try_jet(v, exp).map(Val::P).map_err(|e| self.engine(base_col, e))
            }
            Val::Op(_) if neg => Err(err(col, &self.toks[self.pos - 1].0, &[], "negative power of an operator")),
            Val::Op(o) => {
                let mut acc = DiffOperator::multiplication(self.alg.one()).expect("constant");
                for _ in 0..n {
                    acc = acc.compose(&o);
                }
                Ok(Val::Op(acc))
            }
        }
    }

    fn index(&self, name: &str, stem: &str, col: usize) -> Result<Option<u16>, ParseError> {
        if name == stem {
            return Ok(Some(0));
        }
        let Some(rest) = name.strip_prefix(stem).and_then(|r| r.strip_prefix('_')) else { return Ok(None) };
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
            return Err(err(col, &Tok::Ident(name.into()), &[&format!("{stem}_k")], "malformed index"));
        }
        rest.parse()
            .map(Some)
            .map_err(|_| err(col, &Tok::Ident(name.into()), &[], "index too large"))
    }

    fn atom(&mut self) -> Result<Val, ParseError> {
        let (t, col) = self.bump();
        match &t {
            Tok::Int(n) => Ok(Val::P(self.alg.constant(Rational::from_integer(n.clone())))),
            Tok::Sym('(') => {
                let v = self.sum()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(name) if name == "del" => {
                if !self.operators {
                    return Err(err(col, &t, ATOM_START, "'del' requires the 'D:' prefix"));
                }
                Ok(Val::Op(DiffOperator::del_power(self.alg, 1)))
            }
            Tok::Ident(name) if name == "d" => {
                self.expect_sym('(')?;
                let (_, inner) = self.peek().clone();
                let v = self.sum()?;
                self.expect_sym(')')?;
                match v {
                    Val::P(p) => Ok(Val::P(p.total_derivative())),
                    Val::Op(_) => Err(err(inner, &t, &[], "d(...) applies to densities only")),
                }
            }
            Tok::Ident(name) => {
                if let Some(k) = self.index(name, "theta", col)? {
                    return Ok(Val::P(self.alg.theta(k)));
                }
                if let Some(k) = self.index(name, "u", col)? {
                    return Ok(Val::P(self.alg.jet(JetCoordinate::u(k), 1)));
                }
                Err(err(col, &t, ATOM_START, "unknown identifier"))
            }
            _ => Err(err(col, &t, ATOM_START, "unexpected token")),
        }
    }
}

/// Parse a density, or an operator when the text starts with `D:`.
pub fn parse_expression(text: &str, alg: Algebra) -> Result<Expression, ParseError> {
    let trimmed = text.trim_start();
    let lead = text.len() - trimmed.len();
    let (body, offset, operators) = match trimmed.strip_prefix("D:") {
        Some(rest) => (rest, text[..lead].chars().count() + 2, true),
        None => (text, 0, false),
    };
    let mut p = Parser { toks: tokenize(body, offset)?, pos: 0, alg, operators };
    let v = p.sum()?;
    let (t, col) = p.peek().clone();
    if t != Tok::End {
        return Err(err(col, &t, &["+", "-", "*", "/", "^", "end of input"], "unexpected token"));
    }
    Ok(match v {
        Val::P(d) if !operators => Expression::Density(d),
        v => Expression::Operator(p.as_op(v, offset + 1)?),
    })
}

pub fn parse_density(text: &str, alg: Algebra) -> Result<SuperPolynomial, ParseError> {
    match parse_expression(text, alg)? {
        Expression::Density(d) => Ok(d),
        Expression::Operator(_) => Err(err(1, &Tok::Ident("D:".into()), &["density"], "expected a density, found an operator")),
    }
}

pub fn parse_operator(text: &str, alg: Algebra) -> Result<DiffOperator, ParseError> {
    match parse_expression(text, alg)? {
        Expression::Operator(o) => Ok(o),
        Expression::Density(_) => {
            let t = text.trim_start().chars().next().map(String::from).unwrap_or_default();
            Err(err(1, &Tok::Ident(t), &["D:"], "expected an operator"))
        }
    }
}

/// Canonical surface form; `D:` marks operators.
pub fn print_expression(e: &Expression) -> String {
    match e {
        Expression::Density(d) => d.to_string(),
        Expression::Operator(o) => format!("D: {o}"),
    }
}
