//! Truncated power series in `z` with exact coefficients.

use crate::algfun::AlgFun;
use crate::poly::Poly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("function has a pole of order {0} at z = 0")]
    Pole(usize),
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
}

/// Coefficients of `z^0 ..= z^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesZ {
    c: Vec<BigRational>,
}

impl SeriesZ {
    pub fn zero(order: usize) -> Self {
        SeriesZ { c: vec![BigRational::zero(); order + 1] }
    }

    pub fn from_coeffs(c: Vec<BigRational>) -> Self {
        assert!(!c.is_empty(), "series needs at least one coefficient");
        SeriesZ { c }
    }

    pub fn from_poly(p: &Poly, order: usize) -> Self {
        SeriesZ { c: (0..=order).map(|i| p.coeff(i)).collect() }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.c[i]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &SeriesZ) -> SeriesZ {
        let n = self.order().min(o.order());
        SeriesZ { c: (0..=n).map(|i| &self.c[i] + &o.c[i]).collect() }
    }

    pub fn sub(&self, o: &SeriesZ) -> SeriesZ {
        let n = self.order().min(o.order());
        SeriesZ { c: (0..=n).map(|i| &self.c[i] - &o.c[i]).collect() }
    }

    pub fn scale(&self, q: &BigRational) -> SeriesZ {
        SeriesZ { c: self.c.iter().map(|a| a * q).collect() }
    }

    pub fn mul(&self, o: &SeriesZ) -> SeriesZ {
        let n = self.order().min(o.order());
        let mut c = vec![BigRational::zero(); n + 1];
        for (i, a) in self.c.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n + 1 - i) {
                c[i + j] += a * b;
            }
        }
        SeriesZ { c }
    }

    pub fn inv(&self) -> Result<SeriesZ, SeriesError> {
        if self.c[0].is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let n = self.order();
        let inv0 = BigRational::one() / &self.c[0];
        let mut out: Vec<BigRational> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if !self.c[j].is_zero() {
                    acc += &self.c[j] * &out[k - j];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(SeriesZ { c: out })
    }

    /// `n! [z^n]`, the labelled count carried by an exponential generating function.
    pub fn egf_count(&self, n: usize) -> BigRational {
        &self.c[n] * BigRational::from_integer(factorial(n))
    }
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Binomial series of `s = (1 - 2z^2)^{1/2}` through `z^order`.
pub fn s_series(order: usize) -> SeriesZ {
    let mut c = vec![BigRational::zero(); order + 1];
    // binom(1/2, j) (-2)^j, built incrementally.
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut term = BigRational::one();
    let mut j = 0usize;
    while 2 * j <= order {
        c[2 * j] = term.clone();
        let jj = BigRational::from_integer(BigInt::from(j));
        term = term * (&half - &jj) / (&jj + BigRational::one()) * BigRational::from_integer(BigInt::from(-2));
        j += 1;
    }
    SeriesZ { c }
}

/// Taylor coefficients through `z^order`. The denominator may vanish at `0`
/// as long as the numerator vanishes to the same order.
pub fn series_expand(x: &AlgFun, order: usize) -> Result<SeriesZ, SeriesError> {
    let v = x.r().valuation().expect("nonzero denominator");
    let ext = order + v;
    let num = SeriesZ::from_poly(x.p(), ext).add(&SeriesZ::from_poly(x.q(), ext).mul(&s_series(ext)));
    if let Some(i) = num.c.iter().take(v).position(|a| !a.is_zero()) {
        return Err(SeriesError::Pole(v - i));
    }
    let shifted = SeriesZ { c: num.c[v..].to_vec() };
    let den = SeriesZ::from_poly(&x.r().shift_down(v), order);
    Ok(shifted.mul(&den.inv()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn expand_examples() {
        let s = series_expand(&AlgFun::s(), 4).unwrap();
        assert_eq!(s.coeffs(), &[int(1), int(0), int(-1), int(0), rat(-1, 2)]);
        let m0 = AlgFun::new(Poly::from_ints(&[1]), Poly::from_ints(&[-1]), Poly::from_ints(&[0, 1]));
        let m = series_expand(&m0, 4).unwrap();
        assert_eq!(m.coeffs(), &[int(0), int(1), int(0), rat(1, 2), int(0)]);
        let g = AlgFun::one().div(&AlgFun::radicand()).unwrap();
        let gs = series_expand(&g, 4).unwrap();
        assert_eq!(gs.coeffs(), &[int(1), int(0), int(2), int(0), int(4)]);
    }

    #[test]
    fn genuine_pole_is_rejected() {
        let x = AlgFun::one().div(&AlgFun::z()).unwrap();
        assert_eq!(series_expand(&x, 3), Err(SeriesError::Pole(1)));
    }
}
