//! Printed closed formulas for the counts, evaluated exactly, and a reporter that
//! sets each one against the assembled series and the exhaustive oracle.
//!
//! Vertex formulas take `n` (odd); the ones printed in `m` are wrapped with
//! `m = (n - 1)/2`. Leaf formulas take `l`. Where a formula is stated for a
//! sub-family of networks with a given automorphism order, its value is the
//! number of leaf-labelled classes in that sub-family (or, for vertex rows, the
//! vertex-labelled networks they account for).

use crate::catalog::{CatalogError, CatalogSet, Reading, Stratum};
use crate::oracle::{enumerate_k, leaf_classes, LeafClasses, OracleConfig, OracleError};
use crate::poly::Poly;
use crate::series::{factorial, series_expand};
use crate::stdform::StandardForm;
use crate::table::{Labeling, Selection};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("{0}")]
    Domain(String),
    #[error("no printed formula for k={k}, {labeling}, {selection}")]
    NotPrinted { k: u32, labeling: Labeling, selection: Selection },
}

/// What a formula counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Count(Labeling, Selection),
    /// Networks of a vertex stratum whose leaf-labelled class has automorphism group of
    /// the given order.
    Family(Labeling, Stratum, u32),
}

impl Target {
    pub fn labeling(&self) -> Labeling {
        match *self {
            Target::Count(l, _) | Target::Family(l, _, _) => l,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Closed(fn(u64) -> BigRational),
    /// `z (a~(z^2) - b~(z^2) s) / (1 - 2z^2)^{h - 1/2}`, coefficients of `a~`, `b~` from `w^0` up.
    StdForm { a: &'static [(i64, i64)], b: &'static [(i64, i64)], h: u32 },
    /// One printed number at one argument.
    Value(u64, i64),
}

#[derive(Clone, Debug)]
pub struct Formula {
    pub id: &'static str,
    pub k: u32,
    pub target: Target,
    /// Smallest argument for which the expression is stated.
    pub min_arg: u64,
    kind: Kind,
}

impl Formula {
    pub fn labeling(&self) -> Labeling {
        self.target.labeling()
    }

    pub fn is_standard_form(&self) -> bool {
        matches!(self.kind, Kind::StdForm { .. })
    }

    /// The printed standard form, for formulas of that shape.
    pub fn standard_form(&self) -> Option<StandardForm> {
        match self.kind {
            Kind::StdForm { a, b, h } => Some(StandardForm::from_tilde(&poly(a), &poly(b), h)),
            _ => None,
        }
    }

    pub fn applies(&self, arg: u64) -> Result<(), FormulaError> {
        if let Kind::Value(at, _) = self.kind {
            if arg != at {
                return Err(FormulaError::Domain(format!("stated only at {at}")));
            }
        }
        match self.labeling() {
            Labeling::Vertex => {
                if arg % 2 == 0 {
                    return Err(FormulaError::Domain("n even".into()));
                }
                if arg < self.min_arg {
                    return Err(FormulaError::Domain(format!("n < {}", self.min_arg)));
                }
            }
            Labeling::Leaf => {
                if arg < self.min_arg {
                    return Err(FormulaError::Domain(format!("l < {}", self.min_arg)));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, arg: u64) -> Result<BigRational, FormulaError> {
        self.applies(arg)?;
        Ok(match self.kind {
            Kind::Closed(f) => f(arg),
            Kind::Value(_, v) => q(v),
            Kind::StdForm { .. } => {
                let g = self.standard_form().expect("standard form").to_algfun();
                let ser = series_expand(&g, arg as usize).expect("printed forms are analytic at 0");
                ser.egf_count(arg as usize)
            }
        })
    }
}

fn poly(c: &[(i64, i64)]) -> Poly {
    Poly::from_coeffs(c.iter().map(|&(n, d)| BigRational::new(n.into(), d.into())).collect())
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn fr(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn qu(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn fact(n: u64) -> BigRational {
    BigRational::from_integer(factorial(n as usize))
}

fn binom(n: u64, k: u64) -> BigRational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Polynomial with integer coefficients, highest degree first.
fn horner(c: &[i64], x: &BigRational) -> BigRational {
    c.iter().fold(BigRational::zero(), |acc, &a| acc * x + q(a))
}

/// Same with rational coefficients.
fn horner_q(c: &[(i64, i64)], x: &BigRational) -> BigRational {
    c.iter().fold(BigRational::zero(), |acc, &(a, b)| acc * x + fr(a, b))
}

fn half_n(n: u64) -> u64 {
    (n - 1) / 2
}

// k = 1

fn exact_g1(n: u64) -> BigRational {
    let m = half_n(n);
    fact(n) * pow2(m as i64 - 1) * (qu(n + 1) * binom(n - 1, m) / pow2(n as i64 - 1) - q(1))
}

fn exact_t1(n: u64) -> BigRational {
    let m = half_n(n);
    fact(n) * pow2(m as i64 - 1) * (qu(n - 1) * binom(n - 1, m) / pow2(n as i64 - 1) - q(1))
}

fn exact_gl1(l: u64) -> BigRational {
    fact(l) * pow2(l as i64) * (qu(l + 1) * binom(2 * l, l) / pow2(2 * l as i64) - fr(1, 2))
}

fn t1l(l: u64) -> BigRational {
    fact(l) * pow2(l as i64) * (qu(l) * binom(2 * l, l) / pow2(2 * l as i64) - fr(1, 2))
}

/// `l! (r(l) 2^{-l} binom(2l + 2k - 2, l + k - 1) - 2^l p(l))`.
fn table_row(l: u64, k: u64, r: BigRational, p: BigRational) -> BigRational {
    fact(l) * (r * pow2(-(l as i64)) * binom(2 * l + 2 * k - 2, l + k - 1) - pow2(l as i64) * p)
}

fn table1_k1(l: u64) -> BigRational {
    table_row(l, 1, qu(l), fr(1, 2))
}

// k = 2

fn exact_g2(n: u64) -> BigRational {
    let m = half_n(n);
    let mq = qu(m);
    let p1 = horner(&[30, 20, 15, -20], &mq);
    let p2 = horner(&[2, 1, 0], &mq);
    fact(n)
        * pow2(m as i64 - 2)
        * (p1 * qu(n - 1) * binom(n - 1, m) / (q(15) * qu(n - 2) * pow2(n as i64 - 1)) - p2)
}

fn exact_gp2(n: u64) -> BigRational {
    let m = half_n(n);
    fact(n) * pow2(m as i64 - 1) * qu(n - 1) * (qu(n - 1) * binom(n - 1, m) / pow2(n as i64) - fr(1, 2))
}

fn exact_gen2(n: u64) -> BigRational {
    let m = half_n(n);
    let mq = qu(m);
    let a = horner(&[30, 80, -15, -20], &mq);
    let b = horner_q(&[(1, 1), (3, 2), (0, 1)], &mq);
    fact(n) * pow2(m as i64 - 1) * (a * qu(n - 1) * binom(n - 1, m) / (q(15) * qu(n - 2) * pow2(n as i64 - 1)) - b)
}

/// `l! 2^{l-1} (A(l) (l+1) binom(2l+2, l+1) / ((6l-3)(2l+1) 4^l) - B(l))`.
fn k2_leaf_shape(l: u64, a: BigRational, b: BigRational) -> BigRational {
    let lq = qu(l);
    fact(l)
        * pow2(l as i64 - 1)
        * (a * (&lq + q(1)) * binom(2 * l + 2, l + 1) / ((q(6) * &lq - q(3)) * (q(2) * &lq + q(1)) * pow2(2 * l as i64)) - b)
}

fn k2_dot_leaf(l: u64) -> BigRational {
    let lq = qu(l);
    k2_leaf_shape(l, horner(&[6, 19, 18, -7, -3], &lq), horner(&[2, 5, 3], &lq))
}

fn k2_ddot_leaf(l: u64) -> BigRational {
    let lq = qu(l);
    fact(l) * pow2(l as i64 - 1) * (&lq + q(1)) * binom(2 * l + 2, l + 1)
        / ((q(2) * &lq - q(1)) * (q(2) * &lq + q(1)) * pow2(2 * l as i64))
}

fn exact_gl2(l: u64) -> BigRational {
    let lq = qu(l);
    k2_leaf_shape(l, horner(&[6, 19, 18, -7, 0], &lq), horner(&[2, 5, 3], &lq))
}

fn k2_mult_leaf(l: u64) -> BigRational {
    let lq = qu(l);
    fact(l) * pow2(l as i64 + 1) * (&lq + q(1)) * ((&lq + q(1)) * binom(2 * l + 2, l + 1) / pow2(2 * l as i64 + 2) - fr(1, 2))
}

fn g2l(l: u64) -> BigRational {
    let lq = qu(l);
    k2_leaf_shape(l, horner(&[6, 31, 30, -10, -3], &lq), horner_q(&[(2, 1), (41, 8), (25, 8)], &lq))
}

fn table1_k2(l: u64) -> BigRational {
    let lq = qu(l);
    let r = (&lq + q(1)) * horner(&[6, 19, 18, -7, 0], &lq) / (q(2) * (q(6) * &lq - q(3)) * (q(2) * &lq + q(1)));
    table_row(l, 2, r, horner(&[2, 5, 3], &lq) / q(2))
}

// k = 3. The printed coefficient formulas are in m with n = 2m + 1; where they write
// `2n - 3` or `2n - 5` inside a formula in m, the quantity that matches the series is
// `2m - 3`, `2m - 5`, and that is what is evaluated here.

/// `m (m-1) binom(2m, m)`.
fn central(m: u64) -> BigRational {
    qu(m) * qu(m - 1) * binom(2 * m, m)
}

fn k3_f(m: u64, a: &[i64], b: &[i64]) -> BigRational {
    let mq = qu(m);
    pow2(m as i64 - 6) / q(3)
        * (horner(a, &mq) * central(m) / (q(35) * (q(2) * &mq - q(1)) * pow2(2 * (m as i64 - 2))) - horner(b, &mq))
}

fn k3_total(n: u64) -> BigRational {
    fact(n) * k3_f(half_n(n), &[104, 836, 876, -454, -79], &[48, 127, -60, -121, 6])
}

fn k3_nomult(n: u64) -> BigRational {
    fact(n) * k3_f(half_n(n), &[104, 416, 596, -384, 61], &[48, 31, -12, -73, 6])
}

fn k3_mult_f(m: u64) -> BigRational {
    let mq = qu(m);
    pow2(m as i64 - 1)
        * (horner(&[6, 4, -1, -2], &mq) * central(m) / (q(3) * (q(2) * &mq - q(1)) * pow2(2 * m as i64))
            - horner_q(&[(1, 1), (-1, 2), (0, 1), (-1, 2)], &mq))
}

fn k3_mult(n: u64) -> BigRational {
    fact(n) * k3_mult_f(half_n(n))
}

fn k3_dot_f(m: u64) -> BigRational {
    if m == 3 {
        return q(8);
    }
    let mq = qu(m);
    let a = horner(&[280, -288, -1086, -2626, 9239, -7463, 4290], &mq);
    let b = horner_q(&[(24, 1), (-31, 2), (6, 1), (85, 2), (-21, 1)], &mq);
    pow2(m as i64 - 5) / q(3)
        * (a * central(m)
            / (q(35) * (q(2) * &mq - q(5)) * (q(2) * &mq - q(3)) * (q(2) * &mq - q(1)) * pow2(2 * (m as i64 - 2)))
            - b)
}

fn k3_s1_f(m: u64) -> BigRational {
    let mq = qu(m);
    pow2(m as i64 - 2) * central(m) / ((q(2) * &mq - q(3)) * (q(2) * &mq - q(1)) * pow2(2 * m as i64))
}

fn k3_s2_f(m: u64) -> BigRational {
    if m == 3 {
        return q(0);
    }
    let mq = qu(m);
    pow2(m as i64 - 3)
        * (horner(&[2, -15, 38, -34], &mq) * central(m)
            / ((q(2) * &mq - q(5)) * (q(2) * &mq - q(3)) * (q(2) * &mq - q(1)) * pow2(2 * (m as i64 - 1)))
            - (&mq - q(3)) / q(2))
}

fn k3_dot_leaf(l: u64) -> BigRational {
    fact(l) * k3_dot_f(l + 2)
}

fn k3_s1_leaf(l: u64) -> BigRational {
    q(4) * fact(l) * k3_s1_f(l + 2)
}

fn k3_s2_leaf(l: u64) -> BigRational {
    q(2) * fact(l) * k3_s2_f(l + 2)
}

fn k3_nomult_leaf_sum(l: u64) -> BigRational {
    k3_dot_leaf(l) + k3_s1_leaf(l) + k3_s2_leaf(l)
}

fn table1_k3(l: u64) -> BigRational {
    let lq = qu(l);
    let r = (&lq + q(1)) * (&lq + q(2)) * horner(&[280, 3072, 12834, 22386, 10949, -5211, -3990], &lq)
        / (q(840) * (q(2) * &lq + q(3)) * (q(2) * &lq + q(1)) * (q(2) * &lq - q(1)));
    table_row(l, 3, r, horner(&[48, 415, 1326, 1799, 816], &lq) / q(768))
}

fn k3_mult_dot_f(m: u64) -> BigRational {
    let mq = qu(m);
    pow2(m as i64 - 2)
        * (horner(&[6, -5, -7, -2, 6], &mq) * central(m)
            / (q(3) * (q(2) * &mq - q(3)) * (q(2) * &mq - q(1)) * pow2(2 * (m as i64 - 1)))
            - horner(&[2, -1, -1, 0], &mq))
}

fn k3_mult_ddot_f(m: u64) -> BigRational {
    let mq = qu(m);
    pow2(m as i64 - 1) * central(m) * (&mq - q(2)) / ((q(2) * &mq - q(3)) * (q(2) * &mq - q(1)) * pow2(2 * m as i64))
}

fn k3_mult_dot_leaf(l: u64) -> BigRational {
    fact(l) * k3_mult_dot_f(l + 2)
}

fn k3_mult_ddot_leaf(l: u64) -> BigRational {
    q(2) * fact(l) * k3_mult_ddot_f(l + 2)
}

fn k3_mult_leaf_sum(l: u64) -> BigRational {
    k3_mult_dot_leaf(l) + k3_mult_ddot_leaf(l)
}

fn k3_mult_leaf(l: u64) -> BigRational {
    let lq = qu(l);
    fact(l)
        * pow2(l as i64)
        * ((&lq + q(1)) * (&lq + q(2)) * (&lq + q(2)) * horner(&[6, 31, 45, 15], &lq) * binom(2 * l + 4, l + 2)
            / (q(3) * (q(2) * &lq + q(1)) * (q(2) * &lq + q(3)) * pow2(2 * l as i64 + 2))
            - horner(&[2, 11, 19, 10], &lq))
}

use Labeling::{Leaf, Vertex};
use Selection::{All, Mult, NoMult, TreeChild};

const fn closed(id: &'static str, k: u32, target: Target, min_arg: u64, f: fn(u64) -> BigRational) -> Formula {
    Formula { id, k, target, min_arg, kind: Kind::Closed(f) }
}

const fn std_form(
    id: &'static str,
    k: u32,
    target: Target,
    a: &'static [(i64, i64)],
    b: &'static [(i64, i64)],
    h: u32,
) -> Formula {
    Formula { id, k, target, min_arg: 1, kind: Kind::StdForm { a, b, h } }
}

/// Every printed formula, in a fixed order.
pub fn formulas() -> Vec<Formula> {
    let fam = Target::Family;
    let cnt = Target::Count;
    vec![
        std_form("G1-std", 1, cnt(Vertex, All), &[(1, 1), (-1, 1)], &[(1, 1), (-1, 1)], 2),
        closed("ExactG1", 1, cnt(Vertex, All), 3, exact_g1),
        closed("ExactT1", 1, cnt(Vertex, TreeChild), 3, exact_t1),
        closed("ExactGL1", 1, cnt(Leaf, All), 1, exact_gl1),
        closed("T1L", 1, cnt(Leaf, TreeChild), 1, t1l),
        closed("Table1-k1", 1, cnt(Leaf, NoMult), 1, table1_k1),
        std_form("G2-std", 2, cnt(Vertex, All), &[(0, 1), (5, 2), (-1, 2), (-2, 1), (1, 1)], &[(0, 1), (5, 2), (-1, 1)], 4),
        std_form("G2-nomult-std", 2, cnt(Vertex, NoMult), &[(0, 1), (3, 2), (1, 2), (0, 1), (1, 1)], &[(0, 1), (3, 2), (1, 1)], 4),
        std_form("G2-mult-std", 2, cnt(Vertex, Mult), &[(0, 1), (1, 1), (1, 1)], &[(0, 1), (1, 1)], 1),
        std_form(
            "G2-nomult-dot-std",
            2,
            fam(Vertex, Stratum::NoMult, 1),
            &[(0, 1), (1, 1), (4, 1), (-9, 1), (11, 1), (-4, 1)],
            &[(0, 1), (1, 1), (4, 1), (-6, 1), (4, 1)],
            4,
        ),
        std_form("G2-nomult-ddot-std", 2, fam(Vertex, Stratum::NoMult, 2), &[(0, 1), (1, 2), (-1, 2)], &[(0, 1), (1, 2)], 1),
        closed("ExactG2", 2, cnt(Vertex, NoMult), 5, exact_g2),
        closed("ExactGP2", 2, cnt(Vertex, Mult), 5, exact_gp2),
        closed("ExactGen2", 2, cnt(Vertex, All), 5, exact_gen2),
        closed("GL2-nomult-dot", 2, fam(Leaf, Stratum::NoMult, 1), 1, k2_dot_leaf),
        closed("GL2-nomult-ddot", 2, fam(Leaf, Stratum::NoMult, 2), 1, k2_ddot_leaf),
        closed("ExactGL2", 2, cnt(Leaf, NoMult), 1, exact_gl2),
        closed("GL2-mult", 2, cnt(Leaf, Mult), 1, k2_mult_leaf),
        closed("G2L", 2, cnt(Leaf, All), 1, g2l),
        closed("Table1-k2", 2, cnt(Leaf, NoMult), 1, table1_k2),
        std_form(
            "G3-std",
            3,
            cnt(Vertex, All),
            &[(0, 1), (0, 1), (109, 4), (-23, 2), (-10, 1), (5, 1), (1, 1)],
            &[(0, 1), (0, 1), (109, 4), (-5, 1), (-7, 2), (1, 1)],
            6,
        ),
        closed("G3-F", 3, cnt(Vertex, All), 7, k3_total),
        std_form(
            "G3-nomult-std",
            3,
            cnt(Vertex, NoMult),
            &[(0, 1), (0, 1), (69, 4), (2, 1), (4, 1), (2, 1), (3, 1)],
            &[(0, 1), (0, 1), (69, 4), (11, 1), (9, 2), (1, 1)],
            6,
        ),
        closed("G3-nomult-F", 3, cnt(Vertex, NoMult), 7, k3_nomult),
        closed("GL3-nomult-dot", 3, fam(Leaf, Stratum::NoMult, 1), 1, k3_dot_leaf),
        closed("GL3-nomult-ddot-s1", 3, fam(Leaf, Stratum::NoMult, 4), 1, k3_s1_leaf),
        closed("GL3-nomult-ddot-s2", 3, fam(Leaf, Stratum::NoMult, 2), 1, k3_s2_leaf),
        Formula { id: "GL3-nomult-l1", k: 3, target: cnt(Leaf, NoMult), min_arg: 1, kind: Kind::Value(1, 51) },
        closed("GL3-nomult-sum", 3, cnt(Leaf, NoMult), 2, k3_nomult_leaf_sum),
        closed("Table1-k3", 3, cnt(Leaf, NoMult), 2, table1_k3),
        std_form(
            "G3-mult-std",
            3,
            cnt(Vertex, Mult),
            &[(0, 1), (0, 1), (10, 1), (13, 2), (-1, 1), (1, 1)],
            &[(0, 1), (0, 1), (10, 1), (4, 1)],
            6,
        ),
        closed("G3-mult-F", 3, cnt(Vertex, Mult), 7, k3_mult),
        std_form("G3-mult-ddot-std", 3, fam(Vertex, Stratum::Mult, 2), &[(0, 1), (1, 2)], &[], 2),
        closed("GL3-mult-dot", 3, fam(Leaf, Stratum::Mult, 1), 1, k3_mult_dot_leaf),
        closed("GL3-mult-ddot", 3, fam(Leaf, Stratum::Mult, 2), 1, k3_mult_ddot_leaf),
        closed("GL3-mult-sum", 3, cnt(Leaf, Mult), 1, k3_mult_leaf_sum),
        closed("GL3-mult", 3, cnt(Leaf, Mult), 1, k3_mult_leaf),
    ]
}

pub fn formula(id: &str) -> Option<Formula> {
    formulas().into_iter().find(|f| f.id == id)
}

/// The closed formula for a vertex-labelled count. Even `n` gives a domain error.
pub fn exact_vertex(k: u32, n: u64, selection: Selection) -> Result<BigRational, FormulaError> {
    let id = match (k, selection) {
        (1, All) => "ExactG1",
        (1, NoMult | TreeChild) => "ExactT1",
        (2, NoMult) => "ExactG2",
        (2, Mult) => "ExactGP2",
        (2, All) => "ExactGen2",
        (3, All) => "G3-F",
        (3, NoMult) => "G3-nomult-F",
        (3, Mult) => "G3-mult-F",
        _ => return Err(FormulaError::NotPrinted { k, labeling: Vertex, selection }),
    };
    formula(id).expect("registered").evaluate(n)
}

/// The closed formula for a leaf-labelled count.
pub fn exact_leaf(k: u32, l: u64, selection: Selection) -> Result<BigRational, FormulaError> {
    let id = match (k, selection) {
        (1, All) => "ExactGL1",
        (1, NoMult | TreeChild) => "T1L",
        (2, NoMult) => "ExactGL2",
        (2, Mult) => "GL2-mult",
        (2, All) => "G2L",
        (3, NoMult) if l == 1 => "GL3-nomult-l1",
        (3, NoMult) => "Table1-k3",
        (3, Mult) => "GL3-mult",
        _ => return Err(FormulaError::NotPrinted { k, labeling: Leaf, selection }),
    };
    formula(id).expect("registered").evaluate(l)
}

pub fn exact_tree_child_vertex(n: u64) -> Result<BigRational, FormulaError> {
    formula("ExactT1").expect("registered").evaluate(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Match,
    Mismatch,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaResult {
    pub formula_id: String,
    pub k: u32,
    pub labeling: Labeling,
    #[serde(rename = "n_or_ℓ")]
    pub arg: u64,
    /// `None` outside the formula's domain.
    #[serde(serialize_with = "opt_rational")]
    pub value: Option<BigRational>,
    pub non_integer: bool,
    #[serde(serialize_with = "opt_rational")]
    pub series_value: Option<BigRational>,
    #[serde(serialize_with = "opt_rational")]
    pub oracle_value: Option<BigRational>,
    pub series_status: Status,
    pub oracle_status: Status,
    pub note: Option<String>,
}

fn opt_rational<S: serde::Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

impl FormulaResult {
    /// One word for the CSV `status` column.
    pub fn status(&self) -> &'static str {
        use Status::*;
        match (self.series_status, self.oracle_status) {
            (NotApplicable, NotApplicable) => "not-applicable",
            (Mismatch, Mismatch) => "mismatch",
            (Mismatch, _) => "mismatch-series",
            (_, Mismatch) => "mismatch-oracle",
            _ => "match",
        }
    }

    /// Series and oracle both present and different: a catalog error, not a formula one.
    pub fn series_contradicts_oracle(&self) -> bool {
        matches!((&self.series_value, &self.oracle_value), (Some(s), Some(o)) if s != o)
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Inputs of a consistency report.
pub struct ReportConfig<'a> {
    pub catalogs: &'a CatalogSet,
    pub reading: Reading,
    /// `None` skips the oracle column.
    pub oracle: Option<OracleConfig>,
}

struct OracleCache<'a> {
    cfg: &'a OracleConfig,
    k: u32,
    vertex: BTreeMap<usize, BTreeMap<(usize, bool), BigUint>>,
    leaf: BTreeMap<usize, LeafClasses>,
}

impl OracleCache<'_> {
    fn vertex(&mut self, n: usize) -> Result<&BTreeMap<(usize, bool), BigUint>, OracleError> {
        if !self.vertex.contains_key(&n) {
            let v = enumerate_k(n, self.k as usize, self.cfg)?;
            self.vertex.insert(n, v);
        }
        Ok(&self.vertex[&n])
    }

    fn leaf(&mut self, l: usize) -> Result<&LeafClasses, OracleError> {
        if !self.leaf.contains_key(&l) {
            let c = leaf_classes(l, self.k as usize, self.cfg)?;
            self.leaf.insert(l, c);
        }
        Ok(&self.leaf[&l])
    }

    fn value(&mut self, target: Target, arg: usize) -> Result<Option<BigRational>, OracleError> {
        let k = self.k as usize;
        let n = match target.labeling() {
            Vertex => arg,
            Leaf => 2 * arg + 2 * k - 1,
        };
        if n > self.cfg.max_n || (target.labeling() == Vertex && n < 2 * k + 1) {
            return Ok(None);
        }
        let in_stratum = |s: Stratum, r: usize| match s {
            Stratum::NoMult => r == 0,
            _ => r > 0,
        };
        let big = |u: BigUint| BigRational::from_integer(BigInt::from(u));
        Ok(Some(match target {
            Target::Count(Vertex, sel) => {
                let v = self.vertex(n)?;
                big(v
                    .iter()
                    .filter(|(&(r, tc), _)| match sel {
                        All => true,
                        NoMult => r == 0,
                        Mult => r > 0,
                        TreeChild => tc,
                    })
                    .map(|(_, c)| c.clone())
                    .sum())
            }
            Target::Count(Leaf, sel) => {
                let c = self.leaf(arg)?;
                qu(c.count(|x| match sel {
                    All => true,
                    NoMult => x.r == 0,
                    Mult => x.r > 0,
                    TreeChild => x.tree_child,
                }) as u64)
            }
            Target::Family(lab, s, aut) => {
                let l = (n + 1) / 2 - k;
                if l == 0 {
                    return Ok(None);
                }
                let c = self.leaf(l)?;
                let classes = c.census(|x| in_stratum(s, x.r)).get(&(aut as u64)).copied().unwrap_or(0) as u64;
                match lab {
                    Leaf => qu(classes),
                    Vertex => qu(classes) * fact(n as u64) / (fact(l as u64) * qu(aut as u64)),
                }
            }
        }))
    }
}

struct SeriesCache {
    vertex: BTreeMap<(Option<Stratum>, u32), Vec<BigRational>>,
    leaf: BTreeMap<(Option<Stratum>, u32), Vec<BigRational>>,
}

fn series_values(
    cats: &CatalogSet,
    r: Reading,
    k: u32,
    target: Target,
    n_max: usize,
    l_max: usize,
    cache: &mut SeriesCache,
) -> Result<(), CatalogError> {
    let vkey = |s: Option<Stratum>, aut| (s, aut);
    match target {
        Target::Count(Vertex, sel) => {
            let s = match sel {
                All => None,
                NoMult | TreeChild => Some(Stratum::NoMult),
                Mult => Some(Stratum::Mult),
            };
            if !cache.vertex.contains_key(&vkey(s, 0)) {
                let g = match s {
                    None => cats.assemble_total(k, r)?,
                    Some(s) => cats.assemble(k, s, r)?,
                };
                let ser = series_expand(&g, n_max)?;
                cache.vertex.insert(vkey(s, 0), (0..=n_max).map(|i| ser.egf_count(i)).collect());
            }
        }
        Target::Count(Leaf, _) => {
            if !cache.leaf.contains_key(&(None, 0)) {
                let lc = cats.leaf_counts(k, l_max, r)?;
                let mut pad = |s: Option<Stratum>, v: Vec<BigRational>| {
                    let mut full = vec![BigRational::zero()];
                    full.extend(v);
                    cache.leaf.insert((s, 0), full);
                };
                pad(None, (1..=l_max).map(|l| lc.total(l)).collect());
                pad(Some(Stratum::NoMult), lc.per[&Stratum::NoMult].clone());
                pad(Some(Stratum::Mult), lc.per[&Stratum::Mult].clone());
            }
        }
        Target::Family(Vertex, s, aut) => {
            if !cache.vertex.contains_key(&vkey(Some(s), aut)) {
                let g = if aut == 1 {
                    cats.dot(k, s, r)?
                } else {
                    let mut acc = crate::algfun::AlgFun::zero();
                    for c in cats.ddots(k, s).into_iter().filter(|c| c.symmetry_multiplier == aut) {
                        acc = &acc + &c.assemble(r)?;
                    }
                    acc
                };
                let ser = series_expand(&g, n_max)?;
                cache.vertex.insert(vkey(Some(s), aut), (0..=n_max).map(|i| ser.egf_count(i)).collect());
            }
        }
        Target::Family(Leaf, s, aut) => {
            if !cache.leaf.contains_key(&(Some(s), aut)) {
                for (m, v) in cats.family_counts(k, s, l_max, r)? {
                    let mut full = vec![BigRational::zero()];
                    full.extend(v);
                    cache.leaf.insert((Some(s), m), full);
                }
                cache.leaf.entry((Some(s), aut)).or_insert_with(|| vec![BigRational::zero(); l_max + 1]);
            }
        }
    }
    Ok(())
}

fn series_lookup(cache: &SeriesCache, target: Target, arg: usize) -> Option<BigRational> {
    let key = match target {
        Target::Count(Vertex, sel) => (
            match sel {
                All => None,
                NoMult | TreeChild => Some(Stratum::NoMult),
                Mult => Some(Stratum::Mult),
            },
            0,
        ),
        Target::Count(Leaf, sel) => (
            match sel {
                All => None,
                NoMult | TreeChild => Some(Stratum::NoMult),
                Mult => Some(Stratum::Mult),
            },
            0,
        ),
        Target::Family(_, s, aut) => (Some(s), aut),
    };
    let table = match target.labeling() {
        Vertex => &cache.vertex,
        Leaf => &cache.leaf,
    };
    table.get(&key).and_then(|v| v.get(arg)).cloned()
}

/// Compares every printed formula for this `k` against the series and the oracle, at odd
/// `n <= n_max` and at every `l` with `2l + 2k - 1 <= n_max`. Never fails on a mismatch.
pub fn consistency_report(k: u32, n_max: usize, cfg: &ReportConfig) -> Result<Vec<FormulaResult>, ReportError> {
    let l_max = ((n_max + 1) / 2).saturating_sub(k as usize);
    let mut sc = SeriesCache { vertex: BTreeMap::new(), leaf: BTreeMap::new() };
    let mut oc = cfg.oracle.as_ref().map(|c| OracleCache { cfg: c, k, vertex: BTreeMap::new(), leaf: BTreeMap::new() });
    let mut out = Vec::new();
    for f in formulas().into_iter().filter(|f| f.k == k) {
        // Tree-child series are known only at k = 1, where they equal the no-mult stratum.
        let has_series = !matches!(f.target, Target::Count(_, TreeChild)) || k == 1;
        if has_series {
            series_values(cfg.catalogs, cfg.reading, k, f.target, n_max, l_max, &mut sc)?;
        }
        let args: Vec<u64> = match f.labeling() {
            Vertex => (1..=n_max as u64).step_by(2).collect(),
            Leaf => (1..=l_max as u64).collect(),
        };
        for arg in args {
            let (value, note) = match f.evaluate(arg) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let series_value = if has_series { series_lookup(&sc, f.target, arg as usize) } else { None };
            let oracle_value = match oc.as_mut() {
                Some(o) => o.value(f.target, arg as usize)?,
                None => None,
            };
            let cmp = |other: &Option<BigRational>| match (&value, other) {
                (Some(a), Some(b)) if a == b => Status::Match,
                (Some(_), Some(_)) => Status::Mismatch,
                _ => Status::NotApplicable,
            };
            out.push(FormulaResult {
                formula_id: f.id.to_string(),
                k,
                labeling: f.labeling(),
                arg,
                non_integer: value.as_ref().is_some_and(|v| !v.is_integer()),
                series_status: cmp(&series_value),
                oracle_status: cmp(&oracle_value),
                value,
                series_value,
                oracle_value,
                note,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    formula_id: &'a str,
    k: u32,
    #[serde(rename = "n_or_ℓ")]
    arg: u64,
    value: String,
    series_value: String,
    oracle_value: String,
    status: &'a str,
}

fn show(v: &Option<BigRational>) -> String {
    v.as_ref().map(|q| q.to_string()).unwrap_or_default()
}

pub fn report_csv(rows: &[FormulaResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(CsvRow {
            formula_id: &r.formula_id,
            k: r.k,
            arg: r.arg,
            value: show(&r.value),
            series_value: show(&r.series_value),
            oracle_value: show(&r.oracle_value),
            status: r.status(),
        })
        .expect("rows serialise");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

pub fn report_json(rows: &[FormulaResult]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: &BigRational) -> i64 {
        assert!(v.is_integer(), "{v}");
        v.to_integer().try_into().unwrap()
    }

    #[test]
    fn k1_vertex_values() {
        let v: Vec<i64> = [3, 5, 7].iter().map(|&n| int(&exact_vertex(1, n, All).unwrap())).collect();
        assert_eq!(v, [6, 300, 30240]);
        assert_eq!(int(&exact_tree_child_vertex(3).unwrap()), 0);
    }

    #[test]
    fn k1_leaf_values() {
        let v: Vec<i64> = (1..=3).map(|l| int(&exact_leaf(1, l, All).unwrap())).collect();
        assert_eq!(v, [1, 5, 36]);
        assert_eq!(int(&exact_leaf(1, 1, TreeChild).unwrap()), 0);
        assert_eq!(formula("Table1-k1").unwrap().evaluate(4).unwrap(), exact_leaf(1, 4, TreeChild).unwrap());
    }

    #[test]
    fn even_and_small_arguments_are_flagged() {
        assert!(matches!(exact_vertex(1, 4, All), Err(FormulaError::Domain(_))));
        assert!(matches!(exact_vertex(2, 3, All), Err(FormulaError::Domain(_))));
        assert!(matches!(exact_leaf(1, 0, All), Err(FormulaError::Domain(_))));
        assert!(matches!(exact_vertex(1, 5, Mult), Err(FormulaError::NotPrinted { .. })));
    }

    #[test]
    fn printed_k1_standard_form_is_the_vertex_formula() {
        let f = formula("G1-std").unwrap();
        for n in (3..=21).step_by(2) {
            assert_eq!(f.evaluate(n).unwrap(), exact_vertex(1, n, All).unwrap(), "n={n}");
        }
    }

    #[test]
    fn k3_pieces_at_one_leaf() {
        assert_eq!(int(&k3_dot_leaf(1)), 8);
        assert_eq!(int(&k3_s2_leaf(1)), 0);
        assert_eq!(exact_leaf(3, 1, NoMult).unwrap(), q(51));
    }
}
