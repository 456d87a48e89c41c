//! The cross-check matrix: assembled series against the exhaustive oracle (mandatory),
//! and leaf-labelled series and printed formulas against both (reported only).

use crate::catalog::{vertex_counts, CatalogError, CatalogSet, Reading, Stratum};
use crate::closed_forms::{consistency_report, FormulaResult, ReportConfig, ReportError};
use crate::oracle::{enumerate_k, leaf_classes, OracleConfig, OracleError};
use crate::series::SeriesError;
use crate::table::{Labeling, Selection};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl From<ReportError> for VerifyError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Catalog(c) => VerifyError::Catalog(c),
            ReportError::Oracle(o) => VerifyError::Oracle(o),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `n! [z^n]` of the assembled stratum against the vertex-labelled oracle.
    VertexSeries,
    /// Sum of `binom(n, l) (n - l)! / |Aut|` over leaf-labelled classes against the
    /// vertex-labelled oracle count.
    OrbitIdentity,
    /// Leaf-labelled count from the series against the number of oracle classes.
    LeafSeries,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::VertexSeries => "vertex-series",
            CheckKind::OrbitIdentity => "orbit-identity",
            CheckKind::LeafSeries => "leaf-series",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub kind: CheckKind,
    pub k: u32,
    pub labeling: Labeling,
    pub selection: Selection,
    /// `n` or `l`.
    pub size: usize,
    pub expected: String,
    pub got: String,
    pub mandatory: bool,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<15} k={} {} {} size={} oracle={} got={}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.kind.to_string(),
            self.k,
            self.labeling,
            self.selection,
            self.size,
            self.expected,
            self.got,
            if self.mandatory { "" } else { " (reported)" }
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub max_n: usize,
    pub checks: Vec<Check>,
    pub formulas: Vec<FormulaResult>,
}

impl VerifyReport {
    pub fn mandatory_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.mandatory).all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn stratum_of(s: Selection) -> Option<Stratum> {
    match s {
        Selection::NoMult => Some(Stratum::NoMult),
        Selection::Mult => Some(Stratum::Mult),
        _ => None,
    }
}

/// Runs every check for `k = 1, 2, 3` at sizes with `n <= max_n`. The oracle range in
/// `oracle` is raised to `max_n` if needed.
pub fn verify(max_n: usize, catalogs: &CatalogSet, reading: Reading, oracle: &OracleConfig) -> Result<VerifyReport, VerifyError> {
    let ocfg = OracleConfig { max_n: oracle.max_n.max(max_n), ..oracle.clone() };
    let mut checks = Vec::new();
    let mut formulas = Vec::new();
    for k in 1..=3u32 {
        let ku = k as usize;
        // vertex strata; at k = 1 the no-mult networks are exactly the tree-child ones
        let mut sels = vec![Selection::NoMult, Selection::Mult];
        if k == 1 {
            sels.push(Selection::TreeChild);
        }
        let mut series = Vec::new();
        for &sel in &sels {
            let st = stratum_of(sel).unwrap_or(Stratum::NoMult);
            series.push(vertex_counts(&catalogs.assemble(k, st, reading)?, max_n)?);
        }
        let mut totals = vec![BigInt::from(0); max_n + 1];
        for n in (1..=max_n).step_by(2) {
            let by = enumerate_k(n, ku, &ocfg)?;
            let count = |f: &dyn Fn(usize, bool) -> bool| -> BigInt {
                by.iter().filter(|((r, tc), _)| f(*r, *tc)).map(|(_, c)| BigInt::from(c.clone())).sum()
            };
            totals[n] = count(&|_, _| true);
            for (&sel, ser) in sels.iter().zip(&series) {
                let o = match sel {
                    Selection::NoMult => count(&|r, _| r == 0),
                    Selection::Mult => count(&|r, _| r > 0),
                    _ => count(&|_, tc| tc),
                };
                let got = &ser[n];
                checks.push(Check {
                    kind: CheckKind::VertexSeries,
                    k,
                    labeling: Labeling::Vertex,
                    selection: sel,
                    size: n,
                    passed: *got == BigRational::from_integer(o.clone()),
                    expected: o.to_string(),
                    got: got.to_string(),
                    mandatory: true,
                });
            }
        }
        let l_max = ((max_n + 1) / 2).saturating_sub(ku);
        if l_max > 0 {
            let leaf = catalogs.leaf_counts(k, l_max, reading)?;
            for l in 1..=l_max {
                let cl = leaf_classes(l, ku, &ocfg)?;
                let n = cl.n;
                let orbit = BigInt::from(cl.orbit_sum(|_| true));
                checks.push(Check {
                    kind: CheckKind::OrbitIdentity,
                    k,
                    labeling: Labeling::Leaf,
                    selection: Selection::All,
                    size: l,
                    passed: orbit == totals[n],
                    expected: totals[n].to_string(),
                    got: orbit.to_string(),
                    mandatory: true,
                });
                for (sel, st, o) in [(Selection::NoMult, Stratum::NoMult, cl.no_mult()), (Selection::Mult, Stratum::Mult, cl.mult())] {
                    let got = leaf.get(st, l);
                    checks.push(Check {
                        kind: CheckKind::LeafSeries,
                        k,
                        labeling: Labeling::Leaf,
                        selection: sel,
                        size: l,
                        passed: *got == BigRational::from_integer(o.into()),
                        expected: o.to_string(),
                        got: got.to_string(),
                        mandatory: false,
                    });
                }
            }
        }
        let cfg = ReportConfig { catalogs, reading, oracle: Some(ocfg.clone()) };
        formulas.extend(consistency_report(k, max_n, &cfg)?);
    }
    Ok(VerifyReport { max_n, checks, formulas })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrix_passes() {
        let rep = verify(5, &CatalogSet::builtin(), Reading::Adjudicated, &OracleConfig::default()).unwrap();
        assert!(rep.mandatory_passed(), "{:?}", rep.failures().collect::<Vec<_>>());
        // k=1: n = 1, 3, 5 for three selections; k=2, 3: two selections each
        let vs = rep.checks.iter().filter(|c| c.kind == CheckKind::VertexSeries).count();
        assert_eq!(vs, 3 * 3 + 2 * 3 * 2);
        assert!(rep.checks.iter().any(|c| c.kind == CheckKind::OrbitIdentity && c.k == 2));
    }
}
