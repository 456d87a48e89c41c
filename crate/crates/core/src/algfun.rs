//! Elements `(p + q*s)/r` of the quadratic extension `Q(z)[s]`, `s^2 = 1 - 2z^2`.

use crate::poly::Poly;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgError {
    #[error("division by zero")]
    DivisionByZero,
}

/// Canonical: `gcd(p, q, r) = 1`, `r` monic, zero is `(0, 0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgFun {
    p: Poly,
    q: Poly,
    r: Poly,
}

impl AlgFun {
    /// Canonicalizing constructor; panics on `r = 0`.
    pub fn new(p: Poly, q: Poly, r: Poly) -> Self {
        assert!(!r.is_zero(), "AlgFun with zero denominator");
        if p.is_zero() && q.is_zero() {
            return AlgFun::zero();
        }
        let g = Poly::gcd(&Poly::gcd(&p, &q), &r);
        let (p, q, r) = if g.is_one() {
            (p, q, r)
        } else {
            (p.div_rem(&g).0, q.div_rem(&g).0, r.div_rem(&g).0)
        };
        let l = r.lead();
        if l.is_one() {
            AlgFun { p, q, r }
        } else {
            let inv = BigRational::one() / l;
            AlgFun { p: p.scale(&inv), q: q.scale(&inv), r: r.scale(&inv) }
        }
    }

    pub fn zero() -> Self {
        AlgFun { p: Poly::zero(), q: Poly::zero(), r: Poly::one() }
    }

    pub fn one() -> Self {
        AlgFun::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        AlgFun { p, q: Poly::zero(), r: Poly::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        AlgFun::from_poly(Poly::constant(c))
    }

    pub fn z() -> Self {
        AlgFun::from_poly(Poly::z())
    }

    pub fn z_pow(k: usize) -> Self {
        AlgFun::from_poly(Poly::monomial(BigRational::one(), k))
    }

    /// The radical `s = sqrt(1 - 2z^2)`.
    pub fn s() -> Self {
        AlgFun { p: Poly::zero(), q: Poly::one(), r: Poly::one() }
    }

    /// `1 - 2z^2` as an element.
    pub fn radicand() -> Self {
        AlgFun::from_poly(Poly::radicand())
    }

    pub fn p(&self) -> &Poly {
        &self.p
    }
    pub fn q(&self) -> &Poly {
        &self.q
    }
    pub fn r(&self) -> &Poly {
        &self.r
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.q.is_zero() && self.r.is_one() && self.p.is_one()
    }

    /// `(p - q*s)/r`
    pub fn conjugate(&self) -> Self {
        AlgFun { p: self.p.clone(), q: -&self.q, r: self.r.clone() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return AlgFun::zero();
        }
        AlgFun { p: self.p.scale(c), q: self.q.scale(c), r: self.r.clone() }
    }

    /// `(p^2 - q^2 (1-2z^2)) / r^2` has no radical; this returns its numerator.
    fn norm_numerator(&self) -> Poly {
        &(&self.p * &self.p) - &(&(&self.q * &self.q) * &Poly::radicand())
    }

    pub fn inv(&self) -> Result<Self, AlgError> {
        if self.is_zero() {
            return Err(AlgError::DivisionByZero);
        }
        let n = self.norm_numerator();
        Ok(AlgFun::new(&self.r * &self.p, -&(&self.r * &self.q), n))
    }

    pub fn div(&self, o: &AlgFun) -> Result<Self, AlgError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = AlgFun::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }
}

impl fmt::Debug for AlgFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AlgFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}) + ({})*s) / ({})", self.p, self.q, self.r)
    }
}

impl Add<&AlgFun> for &AlgFun {
    type Output = AlgFun;
    fn add(self, o: &AlgFun) -> AlgFun {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.r == o.r {
            return AlgFun::new(&self.p + &o.p, &self.q + &o.q, self.r.clone());
        }
        let g = Poly::gcd(&self.r, &o.r);
        let a = self.r.div_rem(&g).0;
        let b = o.r.div_rem(&g).0;
        AlgFun::new(
            &(&self.p * &b) + &(&o.p * &a),
            &(&self.q * &b) + &(&o.q * &a),
            &a * &o.r,
        )
    }
}

impl Sub<&AlgFun> for &AlgFun {
    type Output = AlgFun;
    fn sub(self, o: &AlgFun) -> AlgFun {
        self + &(-o)
    }
}

impl Neg for &AlgFun {
    type Output = AlgFun;
    fn neg(self) -> AlgFun {
        AlgFun { p: -&self.p, q: -&self.q, r: self.r.clone() }
    }
}

impl Mul<&AlgFun> for &AlgFun {
    type Output = AlgFun;
    fn mul(self, o: &AlgFun) -> AlgFun {
        if self.is_zero() || o.is_zero() {
            return AlgFun::zero();
        }
        let p = &(&self.p * &o.p) + &(&(&self.q * &o.q) * &Poly::radicand());
        let q = &(&self.p * &o.q) + &(&self.q * &o.p);
        AlgFun::new(p, q, &self.r * &o.r)
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr<AlgFun> for AlgFun {
            type Output = AlgFun;
            fn $m(self, o: AlgFun) -> AlgFun {
                (&self).$m(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn af(p: &[i64], q: &[i64], r: &[i64]) -> AlgFun {
        AlgFun::new(Poly::from_ints(p), Poly::from_ints(q), Poly::from_ints(r))
    }

    #[test]
    fn addition_examples() {
        assert!((&af(&[1], &[], &[1]) + &af(&[-1], &[], &[1])).is_zero());
        assert_eq!(&AlgFun::s() + &AlgFun::s(), af(&[], &[2], &[1]));
        let x = af(&[1], &[1], &[0, 0, 2]);
        let y = af(&[1], &[-1], &[0, 0, 2]);
        assert_eq!(&x + &y, af(&[1], &[], &[0, 0, 1]));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(&AlgFun::s() * &AlgFun::s(), AlgFun::radicand());
        let one_plus = af(&[1], &[1], &[1]);
        assert_eq!(&one_plus * &one_plus.conjugate(), af(&[0, 0, 2], &[], &[1]));
        let inv_z = af(&[1], &[], &[0, 1]);
        assert!((&AlgFun::z() * &inv_z).is_one());
    }

    #[test]
    fn division_examples() {
        let one_minus_s = af(&[1], &[-1], &[1]);
        assert_eq!(
            AlgFun::one().div(&one_minus_s).unwrap(),
            af(&[1], &[1], &[0, 0, 2])
        );
        let x = af(&[3, 1], &[0, 2], &[1, 0, 5]);
        assert!(x.div(&x).unwrap().is_one());
        assert_eq!(AlgFun::radicand().div(&AlgFun::s()).unwrap(), AlgFun::s());
        assert_eq!(AlgFun::one().div(&AlgFun::zero()), Err(AlgError::DivisionByZero));
    }

    #[test]
    fn canonical_form_is_monic_and_reduced() {
        let x = AlgFun::new(
            Poly::from_ints(&[2, 2]),
            Poly::from_ints(&[4, 4]),
            Poly::from_ints(&[6, 6]),
        );
        assert_eq!(x.r(), &Poly::one());
        assert_eq!(x.p(), &Poly::constant(rat(1, 3)));
        assert_eq!(x.q(), &Poly::constant(rat(2, 3)));
        assert_eq!(AlgFun::zero().r(), &Poly::one());
        assert_eq!(x.scale(&int(3)), af(&[1], &[2], &[1]));
    }
}
