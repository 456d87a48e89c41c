//! Exact numbers `a + b*sqrt(2)` with rational `a`, `b`.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt2 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        QSqrt2 { a, b: BigRational::zero() }
    }

    /// `b * sqrt(2)`
    pub fn sqrt2_times(b: BigRational) -> Self {
        QSqrt2 { a: BigRational::zero(), b }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        QSqrt2 { a: &self.a * q, b: &self.b * q }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
}

impl Add for &QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Mul for &QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: &QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(2.into());
        QSqrt2 {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt(2)", self.b),
            (false, false) => write!(f, "{} + {}*sqrt(2)", self.a, self.b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn sqrt2_squares_to_two() {
        let r = QSqrt2::sqrt2_times(rat(1, 1));
        assert_eq!(&r * &r, QSqrt2::rational(rat(2, 1)));
        assert_eq!(QSqrt2::sqrt2_times(rat(1, 4)).to_string(), "1/4*sqrt(2)");
    }
}
