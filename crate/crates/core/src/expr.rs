//! Prefix expressions over the generating-function blocks.
//!
//! ```text
//! expr  := number | "(" op args ")"
//! op    := "*" | "+" | "-" | "^" | "z" | "M" | "Mt" | "Q" | "P" | "Ps"
//! sum   := "[" marker* "]"
//! ```
//!
//! `(z k)` is `z^k`, `(M [..])` the Motzkin function at a marker sum, `(Mt i [..])`
//! its pruned-root variant, `(Q [..])` the quasi-inverse `1/(1 - zM)`, and
//! `(P y yt yh)` / `(Ps y yt yh)` the path functions. `(- a)` negates, `(- a b ..)`
//! subtracts, `(^ e n)` is a nonnegative integer power.

use crate::algfun::AlgFun;
use crate::blocks::{Blocks, MarkerSum};
use crate::jet::{JetError, MarkerJet};
use num_rational::BigRational;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of expression")]
    Eof,
    #[error("unexpected token `{0}`")]
    Unexpected(String),
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("`{0}` takes {1} arguments")]
    Arity(String, &'static str),
    #[error("bad number `{0}`")]
    Number(String),
    #[error("trailing input after expression: `{0}`")]
    Trailing(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigRational),
    ZPow(u32),
    M(MarkerSum),
    MTilde(String, MarkerSum),
    Q(MarkerSum),
    P(MarkerSum, MarkerSum, MarkerSum),
    PStar(MarkerSum, MarkerSum, MarkerSum),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Neg(Box<Expr>),
    Sub(Box<Expr>, Vec<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    LBrack,
    RBrack,
    Atom(String),
}

fn tokenize(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Tok>| {
        if !cur.is_empty() {
            out.push(Tok::Atom(std::mem::take(cur)));
        }
    };
    for ch in src.chars() {
        match ch {
            '(' | ')' | '[' | ']' => {
                flush(&mut cur, &mut out);
                out.push(match ch {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    '[' => Tok::LBrack,
                    _ => Tok::RBrack,
                });
            }
            c if c.is_whitespace() || c == ',' => flush(&mut cur, &mut out),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    out
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self.toks.get(self.pos).cloned().ok_or(ParseError::Eof)?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            Err(ParseError::Unexpected(format!("{got:?}")))
        }
    }

    fn sum(&mut self) -> Result<MarkerSum, ParseError> {
        self.expect(Tok::LBrack)?;
        let mut out = Vec::new();
        loop {
            match self.next()? {
                Tok::RBrack => return Ok(out),
                Tok::Atom(a) => out.push(a),
                t => return Err(ParseError::Unexpected(format!("{t:?}"))),
            }
        }
    }

    fn uint(&mut self) -> Result<u32, ParseError> {
        match self.next()? {
            Tok::Atom(a) => a.parse().map_err(|_| ParseError::Number(a)),
            t => Err(ParseError::Unexpected(format!("{t:?}"))),
        }
    }

    fn args_until_close(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut v = Vec::new();
        while self.peek() != Some(&Tok::Close) {
            v.push(self.expr()?);
        }
        self.expect(Tok::Close)?;
        Ok(v)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.next()? {
            Tok::Atom(a) => parse_rational(&a).map(Expr::Num),
            Tok::Open => {
                let op = match self.next()? {
                    Tok::Atom(a) => a,
                    t => return Err(ParseError::Unexpected(format!("{t:?}"))),
                };
                let e = match op.as_str() {
                    "*" => Expr::Mul(self.args_until_close()?),
                    "+" => Expr::Add(self.args_until_close()?),
                    "-" => {
                        let mut a = self.args_until_close()?;
                        match a.len() {
                            0 => return Err(ParseError::Arity(op, "at least 1")),
                            1 => Expr::Neg(Box::new(a.remove(0))),
                            _ => {
                                let head = a.remove(0);
                                Expr::Sub(Box::new(head), a)
                            }
                        }
                    }
                    "^" => {
                        let base = self.expr()?;
                        let e = self.uint()?;
                        self.expect(Tok::Close)?;
                        Expr::Pow(Box::new(base), e)
                    }
                    "z" => {
                        let e = self.uint()?;
                        self.expect(Tok::Close)?;
                        Expr::ZPow(e)
                    }
                    "M" | "Q" => {
                        let s = self.sum()?;
                        self.expect(Tok::Close)?;
                        if op == "M" {
                            Expr::M(s)
                        } else {
                            Expr::Q(s)
                        }
                    }
                    "Mt" => {
                        let i = match self.next()? {
                            Tok::Atom(a) => a,
                            t => return Err(ParseError::Unexpected(format!("{t:?}"))),
                        };
                        let s = self.sum()?;
                        self.expect(Tok::Close)?;
                        Expr::MTilde(i, s)
                    }
                    "P" | "Ps" => {
                        let y = self.sum()?;
                        let yt = self.sum()?;
                        let yh = self.sum()?;
                        self.expect(Tok::Close)?;
                        if op == "P" {
                            Expr::P(y, yt, yh)
                        } else {
                            Expr::PStar(y, yt, yh)
                        }
                    }
                    _ => return Err(ParseError::UnknownOp(op)),
                };
                Ok(e)
            }
            t => Err(ParseError::Unexpected(format!("{t:?}"))),
        }
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseError> {
    let bad = || ParseError::Number(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == 0.into() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

impl FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut p = Parser { toks: tokenize(s), pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(ParseError::Trailing(format!("{:?}", &p.toks[p.pos..])));
        }
        Ok(e)
    }
}

impl Expr {
    /// Every marker name mentioned anywhere in the expression.
    pub fn markers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        let mut add = |s: &MarkerSum| out.extend(s.iter().cloned());
        match self {
            Expr::Num(_) | Expr::ZPow(_) => {}
            Expr::M(s) | Expr::Q(s) => add(s),
            Expr::MTilde(i, s) => {
                add(s);
                out.insert(i.clone());
            }
            Expr::P(a, b, c) | Expr::PStar(a, b, c) => {
                add(a);
                add(b);
                add(c);
            }
            Expr::Mul(v) | Expr::Add(v) => v.iter().for_each(|e| e.collect(out)),
            Expr::Neg(e) | Expr::Pow(e, _) => e.collect(out),
            Expr::Sub(h, v) => {
                h.collect(out);
                v.iter().for_each(|e| e.collect(out));
            }
        }
    }

    pub fn eval(&self, b: &Blocks) -> Result<MarkerJet, JetError> {
        Ok(match self {
            Expr::Num(q) => b.constant(AlgFun::constant(q.clone())),
            Expr::ZPow(k) => b.z_pow(*k as usize),
            Expr::M(s) => b.motzkin_m(s)?,
            Expr::MTilde(i, s) => b.motzkin_m_tilde(i, s)?,
            Expr::Q(s) => b.quasi_inverse(s)?,
            Expr::P(y, t, h) => b.path_p(y, t, h)?,
            Expr::PStar(y, t, h) => b.path_p_star(y, t, h)?,
            Expr::Mul(v) => {
                let mut acc = b.constant(AlgFun::one());
                for e in v {
                    acc = acc.mul(&e.eval(b)?)?;
                }
                acc
            }
            Expr::Add(v) => {
                let mut acc = MarkerJet::zero(b.markers());
                for e in v {
                    acc = acc.add(&e.eval(b)?)?;
                }
                acc
            }
            Expr::Neg(e) => e.eval(b)?.neg(),
            Expr::Sub(h, v) => {
                let mut acc = h.eval(b)?;
                for e in v {
                    acc = acc.sub(&e.eval(b)?)?;
                }
                acc
            }
            Expr::Pow(e, k) => e.eval(b)?.pow(*k)?,
        })
    }
}

fn fmt_sum(s: &MarkerSum) -> String {
    format!("[{}]", s.join(" "))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Expr]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
        match self {
            Expr::Num(q) => write!(f, "{q}"),
            Expr::ZPow(k) => write!(f, "(z {k})"),
            Expr::M(s) => write!(f, "(M {})", fmt_sum(s)),
            Expr::MTilde(i, s) => write!(f, "(Mt {i} {})", fmt_sum(s)),
            Expr::Q(s) => write!(f, "(Q {})", fmt_sum(s)),
            Expr::P(a, b, c) => write!(f, "(P {} {} {})", fmt_sum(a), fmt_sum(b), fmt_sum(c)),
            Expr::PStar(a, b, c) => write!(f, "(Ps {} {} {})", fmt_sum(a), fmt_sum(b), fmt_sum(c)),
            Expr::Mul(v) => write!(f, "(* {})", list(v)),
            Expr::Add(v) => write!(f, "(+ {})", list(v)),
            Expr::Neg(e) => write!(f, "(- {e})"),
            Expr::Sub(h, v) => write!(f, "(- {h} {})", list(v)),
            Expr::Pow(e, k) => write!(f, "(^ {e} {k})"),
        }
    }
}
