//! Dense univariate polynomials over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Build a rational from two machine integers.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Coefficients indexed by the power of `z`; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(q: BigRational) -> Self {
        Poly::from_coeffs(vec![q])
    }

    /// `coef * z^deg`
    pub fn monomial(coef: BigRational, deg: usize) -> Self {
        let mut c = vec![BigRational::zero(); deg + 1];
        c[deg] = coef;
        Poly::from_coeffs(c)
    }

    pub fn z() -> Self {
        Poly::monomial(BigRational::one(), 1)
    }

    pub fn from_coeffs(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::from_coeffs(c.iter().map(|&x| int(x)).collect())
    }

    /// `1 - 2z^2`, the radicand of `s`.
    pub fn radicand() -> Self {
        Poly::from_ints(&[1, 0, -2])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.c.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn lead(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    /// Lowest power with a nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn scale(&self, q: &BigRational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|a| a * q).collect() }
    }

    /// Divide every coefficient by `z^k`; the low coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Poly {
        debug_assert!(self.c.iter().take(k).all(|x| x.is_zero()));
        Poly::from_coeffs(self.c.iter().skip(k).cloned().collect())
    }

    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let l = self.lead();
        self.scale(&(BigRational::one() / l))
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let inv_lead = BigRational::one() / d.lead();
        let mut r = self.c.clone();
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let f = &r[i + dd] * &inv_lead;
            if f.is_zero() {
                continue;
            }
            for (j, dj) in d.c.iter().enumerate() {
                r[i + j] -= &f * dj;
            }
            q[i] = f;
        }
        r.truncate(dd);
        (Poly::from_coeffs(q), Poly::from_coeffs(r))
    }

    /// Exact quotient if `d` divides `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    /// `p(z^2)` from `p(w)`.
    pub fn in_z_squared(&self) -> Poly {
        let mut c = vec![BigRational::zero(); self.c.len() * 2];
        for (i, a) in self.c.iter().enumerate() {
            c[2 * i] = a.clone();
        }
        Poly::from_coeffs(c)
    }

    /// Inverse of [`Poly::in_z_squared`]; `None` if an odd power is present.
    pub fn from_z_squared(&self) -> Option<Poly> {
        if self.c.iter().skip(1).step_by(2).any(|a| !a.is_zero()) {
            return None;
        }
        Some(Poly::from_coeffs(self.c.iter().step_by(2).cloned().collect()))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coef = i == 0 || !mag.is_one();
            if show_coef {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}z", if show_coef { "*" } else { "" })?,
                _ => write!(f, "{}z^{i}", if show_coef { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::from_coeffs(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { c: self.c.iter().map(|a| -a).collect() }
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
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

    #[test]
    fn division_round_trips() {
        let a = Poly::from_ints(&[3, 0, -1, 4, 2]);
        let d = Poly::from_ints(&[1, 1]);
        let (q, r) = a.div_rem(&d);
        assert_eq!(&(&q * &d) + &r, a);
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        let f = Poly::from_ints(&[1, -2]);
        let a = &f * &Poly::from_ints(&[2, 0, 1]);
        let b = &f * &Poly::from_ints(&[5, 3]);
        assert_eq!(Poly::gcd(&a, &b), f.monic());
        assert!(Poly::gcd(&Poly::zero(), &Poly::zero()).is_zero());
    }

    #[test]
    fn z_squared_substitution() {
        let w = Poly::from_ints(&[1, -1]);
        let z2 = w.in_z_squared();
        assert_eq!(z2, Poly::from_ints(&[1, 0, -1]));
        assert_eq!(z2.from_z_squared(), Some(w));
        assert_eq!(Poly::z().from_z_squared(), None);
    }

    #[test]
    fn display_is_readable() {
        let p = Poly::from_coeffs(vec![rat(1, 2), int(0), int(-1), int(3)]);
        assert_eq!(p.to_string(), "1/2 - z^2 + 3*z^3");
    }
}
