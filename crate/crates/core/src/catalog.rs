//! Skeleton catalogs: one record per skeleton contribution, loaded from TOML,
//! validated, evaluated through marker jets and summed into a stratum GF.
//!
//! Every record keeps the displayed prefactor and expression. An `adjudicated_weight`
//! or `adjudicated_expr` may override them when brute-force enumeration shows the
//! displayed version miscounts; each override carries a justification. The
//! [`Reading`] passed to evaluation chooses between the two.

use crate::algfun::AlgFun;
use crate::blocks::Blocks;
use crate::expr::{parse_rational, Expr, ParseError};
use crate::jet::{JetError, Marker};
use crate::series::{factorial, series_expand, SeriesError};
use crate::table::{CountKey, CountTable, Labeling, NotACount, Provenance, Selection};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{file}: {msg}")]
    Schema { file: String, msg: String },
    #[error("{file}: term {id}: {source}")]
    Parse { file: String, id: String, source: ParseError },
    #[error("term {id}: {source}")]
    Eval { id: String, source: JetError },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("non-integral count: {0}")]
    NotACount(String),
    #[error("no catalog for k={k}, stratum {stratum}")]
    Missing { k: u32, stratum: Stratum },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
pub enum Stratum {
    #[serde(rename = "no-mult")]
    NoMult,
    #[serde(rename = "mult")]
    Mult,
    /// Networks whose leaf-labelled classes carry a nontrivial automorphism.
    #[serde(rename = "leaf-ddot")]
    LeafDdot,
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stratum::NoMult => "no-mult",
            Stratum::Mult => "mult",
            Stratum::LeafDdot => "leaf-ddot",
        })
    }
}

/// Which version of each weight and expression to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reading {
    AsPrinted,
    Adjudicated,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPart {
    prefactor: String,
    expr: String,
    adjudicated_weight: Option<String>,
    adjudicated_expr: Option<String>,
    justification: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    id: String,
    prefactor: String,
    #[serde(default)]
    markers: Vec<String>,
    #[serde(default)]
    derivative: Vec<String>,
    expr: String,
    adjudicated_weight: Option<String>,
    adjudicated_expr: Option<String>,
    justification: Option<String>,
    #[serde(default)]
    subtract: Vec<RawPart>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    name: String,
    k: u32,
    stratum: Stratum,
    parent: Option<Stratum>,
    symmetry_multiplier: Option<u32>,
    normalizer: String,
    adjudicated_normalizer: Option<String>,
    normalizer_justification: Option<String>,
    #[serde(rename = "term")]
    terms: Vec<RawTerm>,
}

/// A weighted expression with an optional adjudicated replacement.
#[derive(Clone, Debug)]
pub struct Part {
    pub prefactor: BigRational,
    pub expr: Expr,
    pub adjudicated_weight: Option<BigRational>,
    pub adjudicated_expr: Option<Expr>,
    pub justification: Option<String>,
}

impl Part {
    pub fn weight(&self, r: Reading) -> &BigRational {
        match (r, &self.adjudicated_weight) {
            (Reading::Adjudicated, Some(w)) => w,
            _ => &self.prefactor,
        }
    }

    pub fn expression(&self, r: Reading) -> &Expr {
        match (r, &self.adjudicated_expr) {
            (Reading::Adjudicated, Some(e)) => e,
            _ => &self.expr,
        }
    }

    pub fn is_adjudicated(&self) -> bool {
        self.adjudicated_weight.is_some() || self.adjudicated_expr.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct SkeletonTerm {
    pub id: String,
    pub markers: Vec<Marker>,
    /// Markers to differentiate, with repetition for higher derivatives.
    pub derivative: Vec<String>,
    pub main: Part,
    /// Non-general configurations removed from the main expression.
    pub subtract: Vec<Part>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub name: String,
    pub k: u32,
    pub stratum: Stratum,
    /// For leaf-ddot catalogs, the vertex stratum they are a part of.
    pub parent: Option<Stratum>,
    pub symmetry_multiplier: u32,
    pub normalizer: BigRational,
    pub adjudicated_normalizer: Option<BigRational>,
    pub normalizer_justification: Option<String>,
    pub terms: Vec<SkeletonTerm>,
}

fn parse_marker(s: &str) -> Result<Marker, String> {
    match s.split_once(':') {
        None => Ok(Marker::new(s, 1)),
        Some((n, c)) => {
            let cap: u8 = c.parse().map_err(|_| format!("bad cap in marker `{s}`"))?;
            if cap == 0 {
                return Err(format!("marker `{s}` has cap 0"));
            }
            Ok(Marker::new(n, cap))
        }
    }
}

impl Catalog {
    pub fn from_toml(file: &str, src: &str) -> Result<Self, CatalogError> {
        let schema = |msg: String| CatalogError::Schema { file: file.to_string(), msg };
        let raw: RawCatalog = toml::from_str(src).map_err(|e| schema(e.to_string()))?;
        let rat = |s: &str| parse_rational(s).map_err(|e| schema(e.to_string()));
        let parse_expr = |id: &str, s: &str| {
            s.parse::<Expr>().map_err(|source| CatalogError::Parse {
                file: file.to_string(),
                id: id.to_string(),
                source,
            })
        };
        let mut terms = Vec::new();
        for t in &raw.terms {
            let markers = t.markers.iter().map(|m| parse_marker(m)).collect::<Result<Vec<_>, _>>().map_err(schema)?;
            let part = |p: &str, e: &str, aw: &Option<String>, ae: &Option<String>, j: &Option<String>| -> Result<Part, CatalogError> {
                Ok(Part {
                    prefactor: rat(p)?,
                    expr: parse_expr(&t.id, e)?,
                    adjudicated_weight: aw.as_deref().map(rat).transpose()?,
                    adjudicated_expr: ae.as_deref().map(|s| parse_expr(&t.id, s)).transpose()?,
                    justification: j.clone(),
                })
            };
            let main = part(&t.prefactor, &t.expr, &t.adjudicated_weight, &t.adjudicated_expr, &t.justification)?;
            let subtract = t
                .subtract
                .iter()
                .map(|s| part(&s.prefactor, &s.expr, &s.adjudicated_weight, &s.adjudicated_expr, &s.justification))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push(SkeletonTerm { id: t.id.clone(), markers, derivative: t.derivative.clone(), main, subtract });
        }
        let cat = Catalog {
            name: raw.name,
            k: raw.k,
            stratum: raw.stratum,
            parent: raw.parent,
            symmetry_multiplier: raw.symmetry_multiplier.unwrap_or(1),
            normalizer: rat(&raw.normalizer)?,
            adjudicated_normalizer: raw.adjudicated_normalizer.as_deref().map(rat).transpose()?,
            normalizer_justification: raw.normalizer_justification,
            terms,
        };
        cat.validate().map_err(schema)?;
        Ok(cat)
    }

    /// Schema rules beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=3).contains(&self.k) {
            return Err(format!("k = {} outside 1..=3", self.k));
        }
        match (self.stratum, self.parent) {
            (Stratum::LeafDdot, Some(Stratum::LeafDdot)) | (Stratum::LeafDdot, None) => {
                return Err("leaf-ddot catalog needs parent no-mult or mult".into())
            }
            (Stratum::LeafDdot, _) => {
                if !matches!(self.symmetry_multiplier, 2 | 4) {
                    return Err("leaf-ddot symmetry_multiplier must be 2 or 4".into());
                }
            }
            (_, Some(_)) => return Err("only leaf-ddot catalogs have a parent".into()),
            _ => {}
        }
        if self.adjudicated_normalizer.is_some() && self.normalizer_justification.is_none() {
            return Err("adjudicated_normalizer without normalizer_justification".into());
        }
        let mut seen = HashSet::new();
        for t in &self.terms {
            if !seen.insert(&t.id) {
                return Err(format!("duplicate term id {}", t.id));
            }
            let mut names = HashSet::new();
            for m in &t.markers {
                if !names.insert(&m.name) {
                    return Err(format!("{}: marker {} declared twice", t.id, m.name));
                }
            }
            for m in &t.markers {
                let n = t.derivative.iter().filter(|d| **d == m.name).count();
                if n > m.cap as usize {
                    return Err(format!("{}: derivative order {n} in {} exceeds cap {}", t.id, m.name, m.cap));
                }
            }
            for d in &t.derivative {
                if !names.contains(d) {
                    return Err(format!("{}: derivative marker {d} not declared", t.id));
                }
            }
            for p in std::iter::once(&t.main).chain(&t.subtract) {
                if p.is_adjudicated() && p.justification.is_none() {
                    return Err(format!("{}: override without justification", t.id));
                }
                for e in std::iter::once(&p.expr).chain(&p.adjudicated_expr) {
                    for m in e.markers() {
                        if !names.contains(&m) {
                            return Err(format!("{}: marker {m} used but not declared", t.id));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn normalizer(&self, r: Reading) -> &BigRational {
        match (r, &self.adjudicated_normalizer) {
            (Reading::Adjudicated, Some(n)) => n,
            _ => &self.normalizer,
        }
    }

    pub fn term(&self, id: &str) -> Option<&SkeletonTerm> {
        self.terms.iter().find(|t| t.id == id)
    }

    /// Normalized weighted sum of all terms.
    pub fn assemble(&self, r: Reading) -> Result<AlgFun, CatalogError> {
        let vals: Vec<AlgFun> = self.terms.par_iter().map(|t| evaluate_term(t, r)).collect::<Result<_, _>>()?;
        let mut acc = AlgFun::zero();
        for v in &vals {
            acc = &acc + v;
        }
        Ok(acc.scale(self.normalizer(r)))
    }

    /// Per-term values (weights applied, normalizer not), in catalog order.
    pub fn term_values(&self, r: Reading) -> Result<Vec<(String, AlgFun)>, CatalogError> {
        self.terms
            .par_iter()
            .map(|t| Ok((t.id.clone(), evaluate_term(t, r)?)))
            .collect()
    }
}

fn derivative_index(t: &SkeletonTerm) -> Vec<u8> {
    t.markers.iter().map(|m| t.derivative.iter().filter(|d| **d == m.name).count() as u8).collect()
}

/// `weight * (D main - sum_j w_j D sub_j)`, where `D` is the mixed derivative at zero.
pub fn evaluate_term(t: &SkeletonTerm, r: Reading) -> Result<AlgFun, CatalogError> {
    let err = |source| CatalogError::Eval { id: t.id.clone(), source };
    let w = t.main.weight(r);
    if w.is_zero() {
        return Ok(AlgFun::zero());
    }
    let blocks = Blocks::new(&t.markers);
    let idx = derivative_index(t);
    let d = |p: &Part| -> Result<AlgFun, CatalogError> {
        p.expression(r).eval(&blocks).and_then(|j| j.extract(&idx)).map_err(err)
    };
    let mut v = d(&t.main)?;
    for s in &t.subtract {
        v = &v - &d(s)?.scale(s.weight(r));
    }
    Ok(v.scale(w))
}

const EMBEDDED: &[(&str, &str)] = &[
    ("k1_nomult.toml", include_str!("../catalogs/k1_nomult.toml")),
    ("k1_mult.toml", include_str!("../catalogs/k1_mult.toml")),
    ("k2_nomult.toml", include_str!("../catalogs/k2_nomult.toml")),
    ("k2_mult.toml", include_str!("../catalogs/k2_mult.toml")),
    ("k2_nomult_ddot.toml", include_str!("../catalogs/k2_nomult_ddot.toml")),
    ("k3_nomult.toml", include_str!("../catalogs/k3_nomult.toml")),
    ("k3_mult.toml", include_str!("../catalogs/k3_mult.toml")),
    ("k3_nomult_ddot_s1.toml", include_str!("../catalogs/k3_nomult_ddot_s1.toml")),
    ("k3_nomult_ddot_s2.toml", include_str!("../catalogs/k3_nomult_ddot_s2.toml")),
    ("k3_mult_ddot.toml", include_str!("../catalogs/k3_mult_ddot.toml")),
];

/// Environment variable naming a directory of `*.toml` catalogs to use instead of the built-in set.
pub const CATALOG_DIR_ENV: &str = "GENNET_CATALOG_DIR";

#[derive(Clone, Debug)]
pub struct CatalogSet {
    pub catalogs: Vec<Catalog>,
}

impl CatalogSet {
    pub fn builtin() -> Self {
        let catalogs = EMBEDDED
            .iter()
            .map(|(f, s)| Catalog::from_toml(f, s).unwrap_or_else(|e| panic!("built-in catalog: {e}")))
            .collect();
        CatalogSet { catalogs }
    }

    pub fn from_dir(dir: &Path) -> Result<Self, CatalogError> {
        let io = |e: std::io::Error| CatalogError::Io(format!("{}: {e}", dir.display()));
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        let mut catalogs = Vec::new();
        for f in files {
            let src = std::fs::read_to_string(&f).map_err(io)?;
            catalogs.push(Catalog::from_toml(&f.display().to_string(), &src)?);
        }
        Ok(CatalogSet { catalogs })
    }

    /// The directory named by [`CATALOG_DIR_ENV`] if set, else the built-in set.
    pub fn load() -> Result<Self, CatalogError> {
        match std::env::var_os(CATALOG_DIR_ENV) {
            Some(d) => CatalogSet::from_dir(Path::new(&d)),
            None => Ok(CatalogSet::builtin()),
        }
    }

    pub fn get(&self, k: u32, stratum: Stratum) -> Result<&Catalog, CatalogError> {
        self.catalogs
            .iter()
            .find(|c| c.k == k && c.stratum == stratum)
            .ok_or(CatalogError::Missing { k, stratum })
    }

    pub fn by_name(&self, name: &str) -> Option<&Catalog> {
        self.catalogs.iter().find(|c| c.name == name)
    }

    /// Leaf-symmetric sub-families of a vertex stratum.
    pub fn ddots(&self, k: u32, parent: Stratum) -> Vec<&Catalog> {
        self.catalogs
            .iter()
            .filter(|c| c.k == k && c.stratum == Stratum::LeafDdot && c.parent == Some(parent))
            .collect()
    }

    pub fn assemble(&self, k: u32, stratum: Stratum, r: Reading) -> Result<AlgFun, CatalogError> {
        self.get(k, stratum)?.assemble(r)
    }

    /// Both vertex strata together.
    pub fn assemble_total(&self, k: u32, r: Reading) -> Result<AlgFun, CatalogError> {
        Ok(&self.assemble(k, Stratum::NoMult, r)? + &self.assemble(k, Stratum::Mult, r)?)
    }

    /// `G + sum_j (m_j - 1) Gddot_j`: its EGF coefficients times `l!` give leaf-labelled counts.
    pub fn leaf_weighted(&self, k: u32, parent: Stratum, r: Reading) -> Result<AlgFun, CatalogError> {
        let mut acc = self.assemble(k, parent, r)?;
        for c in self.ddots(k, parent) {
            let m = BigRational::from_integer((c.symmetry_multiplier as i64 - 1).into());
            acc = &acc + &c.assemble(r)?.scale(&m);
        }
        Ok(acc)
    }

    /// The part of a vertex stratum outside every leaf-symmetric sub-family.
    pub fn dot(&self, k: u32, parent: Stratum, r: Reading) -> Result<AlgFun, CatalogError> {
        let mut acc = self.assemble(k, parent, r)?;
        for c in self.ddots(k, parent) {
            acc = &acc - &c.assemble(r)?;
        }
        Ok(acc)
    }

    /// Predicted number of leaf-labelled classes per automorphism-group order, for
    /// `l = 1..=l_max`: order 1 is the dot part, order `m` collects the sub-families with
    /// multiplier `m`.
    pub fn family_counts(
        &self,
        k: u32,
        parent: Stratum,
        l_max: usize,
        r: Reading,
    ) -> Result<BTreeMap<u32, Vec<BigRational>>, CatalogError> {
        let n_max = 2 * l_max + 2 * k as usize - 1;
        let at = |g: &AlgFun, m: u32| -> Result<Vec<BigRational>, CatalogError> {
            let ser = series_expand(g, n_max)?;
            Ok((1..=l_max)
                .map(|l| {
                    ser.coeff(2 * l + 2 * k as usize - 1) * BigRational::from_integer(factorial(l) * BigInt::from(m))
                })
                .collect())
        };
        let mut out = BTreeMap::new();
        out.insert(1, at(&self.dot(k, parent, r)?, 1)?);
        for c in self.ddots(k, parent) {
            let m = c.symmetry_multiplier;
            let v = at(&c.assemble(r)?, m)?;
            let e = out.entry(m).or_insert_with(|| vec![BigRational::zero(); l_max]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(out)
    }

    /// Vertex-labelled counts `n = 1..=n_max` for one stratum (or both, with `None`).
    pub fn vertex_table(&self, k: u32, stratum: Option<Stratum>, n_max: usize, r: Reading) -> Result<CountTable, CatalogError> {
        let (g, sel) = match stratum {
            None => (self.assemble_total(k, r)?, Selection::All),
            Some(s) => (self.assemble(k, s, r)?, selection_of(s)),
        };
        let mut t = CountTable::new();
        for (n, c) in vertex_counts(&g, n_max)?.iter().enumerate().skip(1) {
            let key = CountKey { k, labeling: Labeling::Vertex, selection: sel, size: n };
            t.insert_rational(key, c, Provenance::Series).map_err(|e| CatalogError::NotACount(e.to_string()))?;
        }
        Ok(t)
    }

    /// Leaf-labelled counts for `l = 1..=l_max`, per vertex stratum.
    pub fn leaf_counts(&self, k: u32, l_max: usize, r: Reading) -> Result<LeafCounts, CatalogError> {
        let n_max = 2 * l_max + 2 * k as usize - 1;
        let mut per = BTreeMap::new();
        for s in [Stratum::NoMult, Stratum::Mult] {
            let ser = series_expand(&self.leaf_weighted(k, s, r)?, n_max)?;
            let v: Vec<BigRational> = (1..=l_max)
                .map(|l| ser.coeff(2 * l + 2 * k as usize - 1) * BigRational::from_integer(factorial(l)))
                .collect();
            per.insert(s, v);
        }
        Ok(LeafCounts { k, per })
    }
}

#[derive(Clone, Debug)]
pub struct LeafCounts {
    pub k: u32,
    pub per: BTreeMap<Stratum, Vec<BigRational>>,
}

impl LeafCounts {
    pub fn get(&self, s: Stratum, l: usize) -> &BigRational {
        &self.per[&s][l - 1]
    }

    pub fn total(&self, l: usize) -> BigRational {
        self.per.values().map(|v| v[l - 1].clone()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// Both strata and their sum as a count table; fails on a non-integral entry.
    pub fn to_table(&self) -> Result<CountTable, NotACount> {
        let mut t = CountTable::new();
        let l_max = self.per.values().map(Vec::len).max().unwrap_or(0);
        for l in 1..=l_max {
            let key = |selection| CountKey { k: self.k, labeling: Labeling::Leaf, selection, size: l };
            for (s, v) in &self.per {
                t.insert_rational(key(selection_of(*s)), &v[l - 1], Provenance::Series)?;
            }
            t.insert_rational(key(Selection::All), &self.total(l), Provenance::Series)?;
        }
        Ok(t)
    }
}

fn selection_of(s: Stratum) -> Selection {
    match s {
        Stratum::NoMult => Selection::NoMult,
        Stratum::Mult => Selection::Mult,
        Stratum::LeafDdot => Selection::NoMult,
    }
}

/// `n! [z^n] g` for `n = 0..=order`.
pub fn vertex_counts(g: &AlgFun, order: usize) -> Result<Vec<BigRational>, SeriesError> {
    let s = series_expand(g, order)?;
    Ok((0..=order).map(|n| s.egf_count(n)).collect())
}

/// True when the value is a nonnegative integer.
pub fn is_count(q: &BigRational) -> bool {
    q.is_integer() && *q >= BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat, Poly};
    use crate::stdform::normalize_to_standard_form;

    fn set() -> CatalogSet {
        CatalogSet::builtin()
    }

    fn counts(k: u32, st: Stratum, n: usize) -> Vec<BigRational> {
        vertex_counts(&set().assemble(k, st, Reading::Adjudicated).unwrap(), n).unwrap()
    }

    #[test]
    fn k1_terms() {
        let c = set();
        let one = |name: &str, id: &str| {
            let t = c.by_name(name).unwrap().term(id).unwrap();
            series_expand(&evaluate_term(t, Reading::Adjudicated).unwrap(), 5).unwrap()
        };
        let dbl = one("k1-mult", "double");
        assert_eq!(dbl.coeff(3), &int(1));
        let tc = one("k1-no-mult", "tc");
        assert_eq!(tc.coeff(3), &int(0));
        assert_eq!(tc.coeff(5), &int(1));
    }

    #[test]
    fn zero_weight_term_vanishes() {
        let src = "name = \"t\"\nk = 1\nstratum = \"mult\"\nnormalizer = \"1\"\n\n[[term]]\nid = \"a\"\nprefactor = \"0\"\nexpr = \"(* (z 2) (M []))\"\n";
        let cat = Catalog::from_toml("t.toml", src).unwrap();
        assert!(cat.assemble(Reading::Adjudicated).unwrap().is_zero());
    }

    #[test]
    fn k1_vertex_counts() {
        let no = counts(1, Stratum::NoMult, 7);
        let mu = counts(1, Stratum::Mult, 7);
        let tot: Vec<BigRational> = no.iter().zip(&mu).map(|(a, b)| a + b).collect();
        assert_eq!(tot[1], int(0));
        assert_eq!(tot[3], int(6));
        assert_eq!(tot[5], int(300));
        assert_eq!(tot[7], int(30240));
    }

    #[test]
    fn k2_mult_at_five() {
        let g = set().assemble(2, Stratum::Mult, Reading::Adjudicated).unwrap();
        assert_eq!(series_expand(&g, 5).unwrap().coeff(5), &int(2));
        assert_eq!(counts(2, Stratum::Mult, 5)[5], int(240));
    }

    #[test]
    fn odd_series_and_integer_counts() {
        let c = set();
        for cat in &c.catalogs {
            let g = cat.assemble(Reading::Adjudicated).unwrap();
            let v = vertex_counts(&g, 41).unwrap();
            for (n, x) in v.iter().enumerate() {
                if n % 2 == 0 {
                    assert!(x.is_zero(), "{} n={n}", cat.name);
                }
            }
            if cat.stratum != Stratum::LeafDdot {
                assert!(v.iter().all(is_count), "{}", cat.name);
            }
        }
    }

    #[test]
    fn k1_no_mult_closed_form() {
        // z^3 (1 - s) / (1 - 2z^2)^{3/2}, written with s in the numerator
        let s = AlgFun::s();
        let num = &(&AlgFun::z_pow(3) * &(&AlgFun::one() - &s)) * &s;
        let want = num.div(&AlgFun::radicand().pow(2)).unwrap();
        assert_eq!(set().assemble(1, Stratum::NoMult, Reading::Adjudicated).unwrap(), want);
    }

    #[test]
    fn standard_forms() {
        let c = set();
        let tilde = |k, st| {
            let sf = normalize_to_standard_form(&c.assemble(k, st, Reading::Adjudicated).unwrap(), k).unwrap();
            (sf.a_tilde().unwrap(), sf.b_tilde().unwrap())
        };
        let (a1, b1) = tilde(1, Stratum::NoMult);
        let (a1m, b1m) = tilde(1, Stratum::Mult);
        assert_eq!(&a1 + &a1m, Poly::from_ints(&[1, -1]));
        assert_eq!(&b1 + &b1m, Poly::from_ints(&[1, -1]));
        let (a2, _) = tilde(2, Stratum::NoMult);
        assert_eq!(a2, Poly::from_coeffs(vec![int(0), rat(3, 2), rat(1, 2), int(0), int(1)]));
        // k = 3: low-order part as expected; the top two coefficients differ by w^5 - 2w^6,
        // which vanishes at w = 1/2 and so leaves the leading constant alone
        let (a3, _) = tilde(3, Stratum::NoMult);
        let want = Poly::from_coeffs(vec![int(0), int(0), rat(69, 4), int(2), int(4), int(2), int(3)]);
        assert_eq!(&a3 - &want, Poly::from_ints(&[0, 0, 0, 0, 0, 1, -2]));
        assert!((&a3 - &want).eval(&rat(1, 2)).is_zero());
    }

    #[test]
    fn leaf_counts_small() {
        let c = set();
        let k1 = c.leaf_counts(1, 3, Reading::Adjudicated).unwrap();
        assert_eq!((1..=3).map(|l| k1.total(l)).collect::<Vec<_>>(), vec![int(1), int(5), int(36)]);
        let k3 = c.leaf_counts(3, 1, Reading::Adjudicated).unwrap();
        // the oracle finds 9 classes; see the acceptance run for the printed value
        assert_eq!(k3.get(Stratum::NoMult, 1), &int(9));
    }

    #[test]
    fn schema_rejections() {
        let head = "name = \"t\"\nk = 1\nstratum = \"mult\"\nnormalizer = \"1\"\n";
        let bad = [
            "[[term]]\nid = \"a\"\nprefactor = \"1\"\nexpr = \"(z 1)\"\n[[term]]\nid = \"a\"\nprefactor = \"1\"\nexpr = \"(z 1)\"\n",
            "[[term]]\nid = \"a\"\nprefactor = \"1\"\nderivative = [\"y\"]\nexpr = \"(z 1)\"\n",
            "[[term]]\nid = \"a\"\nprefactor = \"1\"\nmarkers = [\"y\"]\nderivative = [\"y\", \"y\"]\nexpr = \"(z 1)\"\n",
            "[[term]]\nid = \"a\"\nprefactor = \"1\"\nadjudicated_weight = \"2\"\nexpr = \"(z 1)\"\n",
            "[[term]]\nid = \"a\"\nprefactor = \"1\"\nexpr = \"(M [y])\"\n",
            "[[term]]\nid = \"a\"\nprefactor = \"1\"\nexpr = \"(z 1)\"\nbogus = 1\n",
        ];
        for b in bad {
            let r = Catalog::from_toml("t.toml", &format!("{head}\n{b}"));
            assert!(matches!(r, Err(CatalogError::Schema { .. }) | Err(CatalogError::Parse { .. })), "{b}");
        }
        assert!(Catalog::from_toml("t.toml", &head.replace("k = 1", "k = 4")).is_err());
    }

    #[test]
    fn builtin_overrides_are_justified() {
        for cat in &set().catalogs {
            assert!(cat.validate().is_ok());
            for t in &cat.terms {
                for p in std::iter::once(&t.main).chain(&t.subtract) {
                    if p.is_adjudicated() {
                        assert!(!p.justification.as_deref().unwrap_or("").trim().is_empty(), "{}", t.id);
                    }
                }
            }
        }
    }
}
