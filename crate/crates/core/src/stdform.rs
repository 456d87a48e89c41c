//! Recovery of the representation `G = (a(z) - b(z) s) / (1 - 2z^2)^{h - 1/2}`.

use crate::algfun::AlgFun;
use crate::poly::Poly;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StdFormError {
    #[error("non-conforming denominator: {0} is not a unit times a power of 1 - 2z^2 dividing the target")]
    NonConforming(String),
}

/// `(a - b s) / (1 - 2z^2)^{h - 1/2}`; for `G_k` the exponent is `2k - 1/2`, i.e. `h = 2k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardForm {
    pub h: u32,
    pub a: Poly,
    pub b: Poly,
}

impl StandardForm {
    /// Builds the form from the even-part polynomials: `a(z) = z * a_tilde(z^2)`.
    pub fn from_tilde(a_tilde: &Poly, b_tilde: &Poly, h: u32) -> Self {
        StandardForm {
            h,
            a: a_tilde.in_z_squared().shift_up(1),
            b: b_tilde.in_z_squared().shift_up(1),
        }
    }

    pub fn to_algfun(&self) -> AlgFun {
        // (a - b s) s / (1 - 2z^2)^h
        let d = Poly::radicand().pow(self.h);
        let num = AlgFun::new(-&(&self.b * &Poly::radicand()), self.a.clone(), Poly::one());
        num.div(&AlgFun::from_poly(d)).expect("nonzero power")
    }

    /// `a_tilde` with `a(z) = z * a_tilde(z^2)`, if `a` has that shape.
    pub fn a_tilde(&self) -> Option<Poly> {
        odd_to_tilde(&self.a)
    }

    pub fn b_tilde(&self) -> Option<Poly> {
        odd_to_tilde(&self.b)
    }

    /// Same function written over the exponent `h2 - 1/2` (requires `h2 >= h`).
    pub fn rescaled(&self, h2: u32) -> Self {
        assert!(h2 >= self.h);
        let f = Poly::radicand().pow(h2 - self.h);
        StandardForm { h: h2, a: &self.a * &f, b: &self.b * &f }
    }
}

fn odd_to_tilde(p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(Poly::zero());
    }
    if !p.coeff(0).is_zero() {
        return None;
    }
    p.shift_down(1).from_z_squared()
}

/// Standard form over exponent `2k - 1/2`.
pub fn normalize_to_standard_form(g: &AlgFun, k: u32) -> Result<StandardForm, StdFormError> {
    normalize_with_exponent(g, 2 * k)
}

pub fn normalize_with_exponent(g: &AlgFun, h: u32) -> Result<StandardForm, StdFormError> {
    let d = Poly::radicand().pow(h);
    let bad = || StdFormError::NonConforming(g.r().to_string());
    let a = (g.q() * &d).div_exact(g.r()).ok_or_else(bad)?;
    let pd = g.p() * &d;
    let b = -&pd.div_exact(&(g.r() * &Poly::radicand())).ok_or_else(bad)?;
    let sf = StandardForm { h, a, b };
    debug_assert_eq!(&sf.to_algfun(), g);
    if &sf.to_algfun() != g {
        return Err(bad());
    }
    Ok(sf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn round_trip_on_printed_shape() {
        let at = Poly::from_coeffs(vec![int(0), rat(3, 2), rat(1, 2), int(0), int(1)]);
        let bt = Poly::from_coeffs(vec![int(0), rat(3, 2), int(1)]);
        let sf = StandardForm::from_tilde(&at, &bt, 4);
        let g = sf.to_algfun();
        let back = normalize_to_standard_form(&g, 2).unwrap();
        assert_eq!(back, sf);
        assert_eq!(back.a_tilde().unwrap(), at);
        assert_eq!(back.b_tilde().unwrap(), bt);
    }

    #[test]
    fn rescaling_keeps_the_function() {
        let sf = StandardForm::from_tilde(&Poly::from_ints(&[0, 1, 1]), &Poly::from_ints(&[0, 1]), 1);
        assert_eq!(sf.rescaled(4).to_algfun(), sf.to_algfun());
    }

    #[test]
    fn foreign_denominator_is_rejected() {
        let g = AlgFun::one().div(&AlgFun::from_poly(Poly::from_ints(&[1, -1]))).unwrap();
        assert!(matches!(normalize_to_standard_form(&g, 1), Err(StdFormError::NonConforming(_))));
    }
}
