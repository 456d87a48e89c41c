//! Generating-function building blocks as marker jets: the Motzkin function `M`,
//! the pruned-root variant, the path function `P` and its nonempty version.

use crate::algfun::AlgFun;
use crate::jet::{JetError, Marker, MarkerJet};
use crate::poly::{int, rat};
use crate::series::{series_expand, SeriesError, SeriesZ};
use std::cell::RefCell;
use std::collections::HashMap;

/// Names of the markers substituted into one formal slot; empty means 0.
pub type MarkerSum = Vec<String>;

pub fn msum(names: &[&str]) -> MarkerSum {
    names.iter().map(|s| s.to_string()).collect()
}

/// Block constructors over a fixed marker declaration, with `M` memoized per sum.
pub struct Blocks {
    markers: Vec<Marker>,
    m_cache: RefCell<HashMap<MarkerSum, MarkerJet>>,
}

fn key(sum: &[String]) -> MarkerSum {
    let mut k = sum.to_vec();
    k.sort();
    k
}

impl Blocks {
    pub fn new(markers: &[Marker]) -> Self {
        Blocks { markers: markers.to_vec(), m_cache: RefCell::new(HashMap::new()) }
    }

    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn constant(&self, c: AlgFun) -> MarkerJet {
        MarkerJet::constant(&self.markers, c)
    }

    pub fn z_pow(&self, k: usize) -> MarkerJet {
        self.constant(AlgFun::z_pow(k))
    }

    pub fn sum(&self, y: &[String]) -> Result<MarkerJet, JetError> {
        MarkerJet::marker_sum(&self.markers, y)
    }

    /// `M(z, Y) = (1 - zY - sqrt(1 + (Y^2 - 2) z^2 - 2 z Y)) / z`
    pub fn motzkin_m(&self, y: &[String]) -> Result<MarkerJet, JetError> {
        let k = key(y);
        if let Some(m) = self.m_cache.borrow().get(&k) {
            return Ok(m.clone());
        }
        let yj = self.sum(y)?;
        let z = AlgFun::z();
        let rad = self
            .constant(AlgFun::radicand())
            .add(&yj.mul(&yj)?.scale(&z.pow(2)))?
            .sub(&yj.scale(&z.scale(&int(2))))?;
        let root = rad.sqrt()?;
        let inv_z = AlgFun::one().div(&z)?;
        let m = self
            .constant(AlgFun::one())
            .sub(&yj.scale(&z))?
            .sub(&root)?
            .scale(&inv_z);
        self.m_cache.borrow_mut().insert(k, m.clone());
        Ok(m)
    }

    /// `(1 - z y_i) M(z, Y)`: trees whose root may not be targeted by pointer `i`.
    pub fn motzkin_m_tilde(&self, i: &str, y: &[String]) -> Result<MarkerJet, JetError> {
        let yi = MarkerJet::var(&self.markers, i)?;
        let f = self.constant(AlgFun::one()).sub(&yi.scale(&AlgFun::z()))?;
        f.mul(&self.motzkin_m(y)?)
    }

    /// `1 / (1 - z M(z, Y))`
    pub fn quasi_inverse(&self, y: &[String]) -> Result<MarkerJet, JetError> {
        self.constant(AlgFun::one()).sub(&self.motzkin_m(y)?.scale(&AlgFun::z()))?.inv()
    }

    /// `P = (1 - zY + z*Yhat) / (1 - z (Y + M(z, Ytilde)))`
    pub fn path_p(&self, y: &[String], ytilde: &[String], yhat: &[String]) -> Result<MarkerJet, JetError> {
        let z = AlgFun::z();
        let yj = self.sum(y)?;
        let num = self
            .constant(AlgFun::one())
            .sub(&yj.scale(&z))?
            .add(&self.sum(yhat)?.scale(&z))?;
        let den = self
            .constant(AlgFun::one())
            .sub(&yj.add(&self.motzkin_m(ytilde)?)?.scale(&z))?;
        num.div(&den)
    }

    /// `P - 1`, paths with at least one vertex.
    pub fn path_p_star(&self, y: &[String], ytilde: &[String], yhat: &[String]) -> Result<MarkerJet, JetError> {
        self.path_p(y, ytilde, yhat)?.sub(&self.constant(AlgFun::one()))
    }
}

pub fn all_indices(markers: &[Marker]) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for m in markers {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=m.cap).map(move |e| {
                    let mut q = p.clone();
                    q.push(e);
                    q
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum BlockError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Residual `M - z - zYM - (z/2) M^2`, expanded through `z^order` in every jet slot.
pub fn check_motzkin_equation(
    markers: &[Marker],
    y: &[String],
    order: usize,
) -> Result<Vec<(Vec<u8>, SeriesZ)>, BlockError> {
    let b = Blocks::new(markers);
    let m = b.motzkin_m(y)?;
    let z = AlgFun::z();
    let yj = b.sum(y)?;
    let res = m
        .sub(&b.constant(z.clone()))?
        .sub(&yj.mul(&m)?.scale(&z))?
        .sub(&m.mul(&m)?.scale(&z.scale(&rat(1, 2))))?;
    let mut out = Vec::new();
    for idx in all_indices(markers) {
        out.push((idx.clone(), series_expand(&res.coeff(&idx), order)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn one_marker() -> Vec<Marker> {
        vec![Marker::new("1", 1)]
    }

    #[test]
    fn motzkin_expansion_matches_known_terms() {
        let b = Blocks::new(&one_marker());
        let m = b.motzkin_m(&msum(&["1"])).unwrap();
        let m0 = series_expand(&m.coeff(&[0]), 4).unwrap();
        assert_eq!(m0.coeffs(), &[int(0), int(1), int(0), rat(1, 2), int(0)]);
        let m1 = series_expand(&m.coeff(&[1]), 4).unwrap();
        assert_eq!(m1.coeff(2), &int(1));
        assert_eq!(m1.coeff(4), &rat(3, 2));
    }

    #[test]
    fn m_tilde_drops_root_pointing() {
        let b = Blocks::new(&one_marker());
        let y = msum(&["1"]);
        let m = b.motzkin_m(&y).unwrap();
        let mt = b.motzkin_m_tilde("1", &y).unwrap();
        assert_eq!(mt.base(), m.base());
        let diff = &mt.coeff(&[1]) - &m.coeff(&[1]);
        assert_eq!(diff, -&(&AlgFun::z() * &m.base()));
        let d = series_expand(&mt.coeff(&[1]), 3).unwrap();
        assert_eq!(d.coeff(3), &int(0));
    }

    #[test]
    fn path_examples() {
        let ms = vec![Marker::new("h", 1)];
        let b = Blocks::new(&ms);
        let p = b.path_p(&[], &[], &msum(&["h"])).unwrap();
        let p0 = series_expand(&p.base(), 4).unwrap();
        assert_eq!(p0.coeffs(), &[int(1), int(0), int(1), int(0), rat(3, 2)]);
        let q = b.quasi_inverse(&[]).unwrap().base();
        assert_eq!(p.coeff(&[1]), &AlgFun::z() * &q);
        let ps = b.path_p_star(&[], &[], &[]).unwrap();
        let ps0 = series_expand(&ps.base(), 4).unwrap();
        assert_eq!(ps0.coeffs(), &[int(0), int(0), int(1), int(0), rat(3, 2)]);
    }

    #[test]
    fn quasi_inverse_at_zero_is_inverse_radical() {
        let b = Blocks::new(&[]);
        let q = b.quasi_inverse(&[]).unwrap().base();
        assert_eq!(q, AlgFun::one().div(&AlgFun::s()).unwrap());
    }

    #[test]
    fn residual_vanishes() {
        for (ms, y) in [
            (one_marker(), msum(&["1"])),
            (one_marker(), msum(&[])),
            (vec![Marker::new("1", 1), Marker::new("2", 1)], msum(&["1", "2"])),
        ] {
            for (_, s) in check_motzkin_equation(&ms, &y, 20).unwrap() {
                assert!(s.is_zero());
            }
        }
    }
}
