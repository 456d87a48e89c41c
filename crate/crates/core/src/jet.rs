//! Truncated polynomials in nilpotent marker variables with `AlgFun` coefficients.
//!
//! A marker with cap `c` keeps powers `0..=c`; anything beyond is discarded.
//! Extracting the coefficient of a monomial and multiplying by the factorials of
//! its exponents gives the mixed derivative at all markers zero.

use crate::algfun::{AlgError, AlgFun};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JetError {
    #[error("jet has zero base coefficient and cannot be inverted")]
    ZeroBase,
    #[error("square root needs base radicand exactly 1 - 2z^2, got {0}")]
    BadRadicand(String),
    #[error("multi-index {0:?} exceeds the marker caps")]
    IndexOutOfCaps(Vec<u8>),
    #[error("unknown marker `{0}`")]
    UnknownMarker(String),
    #[error("marker lists differ: {0:?} vs {1:?}")]
    Incompatible(Vec<String>, Vec<String>),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Marker {
    pub name: String,
    pub cap: u8,
}

impl Marker {
    pub fn new(name: &str, cap: u8) -> Self {
        Marker { name: name.to_string(), cap }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkerJet {
    markers: Vec<Marker>,
    coeffs: BTreeMap<Vec<u8>, AlgFun>,
}

impl MarkerJet {
    pub fn zero(markers: &[Marker]) -> Self {
        MarkerJet { markers: markers.to_vec(), coeffs: BTreeMap::new() }
    }

    pub fn constant(markers: &[Marker], c: AlgFun) -> Self {
        let mut j = MarkerJet::zero(markers);
        if !c.is_zero() {
            j.coeffs.insert(vec![0; markers.len()], c);
        }
        j
    }

    pub fn one(markers: &[Marker]) -> Self {
        MarkerJet::constant(markers, AlgFun::one())
    }

    /// The marker variable itself (zero if its cap is 0).
    pub fn var(markers: &[Marker], name: &str) -> Result<Self, JetError> {
        let i = markers
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| JetError::UnknownMarker(name.to_string()))?;
        let mut j = MarkerJet::zero(markers);
        if markers[i].cap > 0 {
            let mut idx = vec![0; markers.len()];
            idx[i] = 1;
            j.coeffs.insert(idx, AlgFun::one());
        }
        Ok(j)
    }

    /// Sum of the named markers; the empty sum is zero.
    pub fn marker_sum(markers: &[Marker], names: &[String]) -> Result<Self, JetError> {
        let mut acc = MarkerJet::zero(markers);
        for n in names {
            acc = acc.add(&MarkerJet::var(markers, n)?)?;
        }
        Ok(acc)
    }

    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &AlgFun)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at all markers zero.
    pub fn base(&self) -> AlgFun {
        self.coeff(&vec![0; self.markers.len()])
    }

    pub fn coeff(&self, idx: &[u8]) -> AlgFun {
        self.coeffs.get(idx).cloned().unwrap_or_else(AlgFun::zero)
    }

    fn check(&self, o: &MarkerJet) -> Result<Vec<Marker>, JetError> {
        let a: Vec<String> = self.markers.iter().map(|m| m.name.clone()).collect();
        let b: Vec<String> = o.markers.iter().map(|m| m.name.clone()).collect();
        if a != b {
            return Err(JetError::Incompatible(a, b));
        }
        Ok(self
            .markers
            .iter()
            .zip(&o.markers)
            .map(|(x, y)| Marker { name: x.name.clone(), cap: x.cap.min(y.cap) })
            .collect())
    }

    fn within(caps: &[Marker], idx: &[u8]) -> bool {
        idx.iter().zip(caps).all(|(i, m)| *i <= m.cap)
    }

    fn insert_add(map: &mut BTreeMap<Vec<u8>, AlgFun>, idx: Vec<u8>, v: AlgFun) {
        if v.is_zero() {
            return;
        }
        match map.get_mut(&idx) {
            Some(cur) => {
                let s = &*cur + &v;
                if s.is_zero() {
                    map.remove(&idx);
                } else {
                    *cur = s;
                }
            }
            None => {
                map.insert(idx, v);
            }
        }
    }

    pub fn add(&self, o: &MarkerJet) -> Result<Self, JetError> {
        let markers = self.check(o)?;
        let mut coeffs = BTreeMap::new();
        for (k, v) in self.coeffs.iter().chain(o.coeffs.iter()) {
            if Self::within(&markers, k) {
                Self::insert_add(&mut coeffs, k.clone(), v.clone());
            }
        }
        Ok(MarkerJet { markers, coeffs })
    }

    pub fn neg(&self) -> Self {
        MarkerJet {
            markers: self.markers.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    pub fn sub(&self, o: &MarkerJet) -> Result<Self, JetError> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MarkerJet) -> Result<Self, JetError> {
        let markers = self.check(o)?;
        let mut coeffs = BTreeMap::new();
        for (ka, va) in &self.coeffs {
            for (kb, vb) in &o.coeffs {
                let idx: Vec<u8> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                if Self::within(&markers, &idx) {
                    Self::insert_add(&mut coeffs, idx, va * vb);
                }
            }
        }
        Ok(MarkerJet { markers, coeffs })
    }

    /// Multiply every coefficient by a marker-free value.
    pub fn scale(&self, c: &AlgFun) -> Self {
        if c.is_zero() {
            return MarkerJet::zero(&self.markers);
        }
        MarkerJet {
            markers: self.markers.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn scale_rational(&self, q: &BigRational) -> Self {
        self.scale(&AlgFun::constant(q.clone()))
    }

    pub fn pow(&self, e: u32) -> Result<Self, JetError> {
        let mut out = MarkerJet::one(&self.markers);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Total degree bound: any product of more nilpotent factors vanishes.
    fn depth(&self) -> u32 {
        self.markers.iter().map(|m| m.cap as u32).sum()
    }

    fn nilpotent_part(&self) -> Self {
        let zero = vec![0u8; self.markers.len()];
        let mut j = self.clone();
        j.coeffs.remove(&zero);
        j
    }

    /// Applies `sum_j c_j eps^j` where `eps` is the nilpotent part.
    fn power_series(eps: &MarkerJet, c: impl Fn(u32) -> AlgFun) -> Result<Self, JetError> {
        let mut out = MarkerJet::zero(&eps.markers);
        let mut p = MarkerJet::one(&eps.markers);
        for j in 0..=eps.depth() {
            if p.is_zero() {
                break;
            }
            out = out.add(&p.scale(&c(j)))?;
            p = p.mul(eps)?;
        }
        Ok(out)
    }

    /// Geometric expansion around the base coefficient.
    pub fn inv(&self) -> Result<Self, JetError> {
        let b = self.base();
        if b.is_zero() {
            return Err(JetError::ZeroBase);
        }
        let binv = b.inv()?;
        let eps = self.nilpotent_part().scale(&binv);
        MarkerJet::power_series(&eps, |j| if j % 2 == 0 { binv.clone() } else { -&binv })
    }

    pub fn div(&self, o: &MarkerJet) -> Result<Self, JetError> {
        self.mul(&o.inv()?)
    }

    /// Square root of a jet whose base is exactly `1 - 2z^2`; the result has base `s`.
    pub fn sqrt(&self) -> Result<Self, JetError> {
        let b = self.base();
        if b != AlgFun::radicand() {
            return Err(JetError::BadRadicand(b.to_string()));
        }
        let eps = self.nilpotent_part().scale(&b.inv()?);
        let s = AlgFun::s();
        MarkerJet::power_series(&eps, |j| s.scale(&binom_half(j)))
    }

    /// Mixed derivative at all markers zero: coefficient times the product of factorials.
    pub fn extract(&self, idx: &[u8]) -> Result<AlgFun, JetError> {
        if idx.len() != self.markers.len() || !Self::within(&self.markers, idx) {
            return Err(JetError::IndexOutOfCaps(idx.to_vec()));
        }
        let f: u64 = idx.iter().map(|&i| (1..=i as u64).product::<u64>()).product();
        Ok(self.coeff(idx).scale(&BigRational::from_integer(BigInt::from(f))))
    }
}

/// `binom(1/2, j)`
fn binom_half(j: u32) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut acc = BigRational::one();
    for i in 0..j {
        let ii = BigRational::from_integer(BigInt::from(i));
        acc = acc * (&half - &ii) / (&ii + BigRational::one());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat, Poly};

    fn mk(spec: &[(&str, u8)]) -> Vec<Marker> {
        spec.iter().map(|(n, c)| Marker::new(n, *c)).collect()
    }

    #[test]
    fn truncating_products() {
        let ms = mk(&[("1", 1), ("2", 1)]);
        let one = MarkerJet::one(&ms);
        let y1 = MarkerJet::var(&ms, "1").unwrap();
        let y2 = MarkerJet::var(&ms, "2").unwrap();
        let prod = one.add(&y1).unwrap().mul(&one.add(&y2).unwrap()).unwrap();
        assert_eq!(prod.coeff(&[1, 1]), AlgFun::one());
        assert_eq!(prod.terms().count(), 4);
        assert!(y1.mul(&y1).unwrap().is_zero());

        let g = mk(&[("g", 2)]);
        let yg = MarkerJet::var(&g, "g").unwrap();
        let sq = MarkerJet::one(&g).add(&yg).unwrap().pow(2).unwrap();
        assert_eq!(sq.coeff(&[1]), AlgFun::constant(int(2)));
        assert_eq!(sq.coeff(&[2]), AlgFun::one());
    }

    #[test]
    fn inverse_examples() {
        let ms = mk(&[("1", 1)]);
        let x = MarkerJet::one(&ms).add(&MarkerJet::var(&ms, "1").unwrap()).unwrap();
        let i = x.inv().unwrap();
        assert_eq!(i.coeff(&[1]), AlgFun::constant(int(-1)));
        assert_eq!(MarkerJet::one(&ms).inv().unwrap(), MarkerJet::one(&ms));

        let g = mk(&[("g", 2)]);
        let two = MarkerJet::constant(&g, AlgFun::constant(int(2)));
        let i = two.add(&MarkerJet::var(&g, "g").unwrap()).unwrap().inv().unwrap();
        assert_eq!(i.coeff(&[0]), AlgFun::constant(rat(1, 2)));
        assert_eq!(i.coeff(&[1]), AlgFun::constant(rat(-1, 4)));
        assert_eq!(i.coeff(&[2]), AlgFun::constant(rat(1, 8)));

        assert_eq!(MarkerJet::zero(&ms).inv(), Err(JetError::ZeroBase));
    }

    #[test]
    fn square_root_examples() {
        let none: Vec<Marker> = vec![];
        let r = MarkerJet::constant(&none, AlgFun::radicand()).sqrt().unwrap();
        assert_eq!(r.base(), AlgFun::s());

        let ms = mk(&[("1", 1)]);
        let y = MarkerJet::var(&ms, "1").unwrap();
        let one_y = MarkerJet::one(&ms).add(&y).unwrap();
        let rad = one_y.mul(&one_y).unwrap().scale(&AlgFun::radicand());
        let root = rad.sqrt().unwrap();
        assert_eq!(root, one_y.scale(&AlgFun::s()));

        // 1 + (y^2 - 2) z^2 - 2 z y
        let z = AlgFun::z();
        let rad = MarkerJet::constant(&ms, AlgFun::radicand())
            .add(&y.mul(&y).unwrap().scale(&z.pow(2)))
            .unwrap()
            .sub(&y.scale(&z.scale(&int(2))))
            .unwrap();
        let root = rad.sqrt().unwrap();
        assert_eq!(root.base(), AlgFun::s());
        assert_eq!(root.coeff(&[1]), -&z.div(&AlgFun::s()).unwrap());
        assert_eq!(root.mul(&root).unwrap(), rad);

        let bad = MarkerJet::one(&ms);
        assert!(matches!(bad.sqrt(), Err(JetError::BadRadicand(_))));
    }

    #[test]
    fn extraction_uses_factorials() {
        let ms = mk(&[("1", 1)]);
        let x = MarkerJet::one(&ms)
            .add(&MarkerJet::var(&ms, "1").unwrap().scale_rational(&int(3)))
            .unwrap();
        assert_eq!(x.extract(&[1]).unwrap(), AlgFun::constant(int(3)));
        assert_eq!(x.extract(&[0]).unwrap(), AlgFun::one());
        assert!(x.extract(&[2]).is_err());

        let g = mk(&[("g", 2)]);
        let yg = MarkerJet::var(&g, "g").unwrap();
        let b = AlgFun::from_poly(Poly::from_ints(&[0, 5]));
        let x = MarkerJet::one(&g).add(&yg.mul(&yg).unwrap().scale(&b)).unwrap();
        assert_eq!(x.extract(&[2]).unwrap(), b.scale(&int(2)));
    }
}
