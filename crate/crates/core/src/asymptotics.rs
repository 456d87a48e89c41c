//! Singularity-analysis constants and high-precision asymptotic estimates.
//!
//! With `G = (a - b s) / (1 - 2z^2)^{2k - 1/2}` and `a`, `b` odd, both dominant
//! singularities `z = ±1/sqrt(2)` contribute, which gives the parity factor
//! `1 - (-1)^n`. The `a` part yields the leading term and the `b` part, whose
//! exponent `2k - 1` is an integer, yields the `1/sqrt(n)` correction:
//!
//! ```text
//! G_{k,n} ~ (sqrt(2)/e)^n n^{n+2k-1} (c_k + c'_k / sqrt(n)),   n odd
//! c_k  = 2 d_k,  d_k = 2 a(1/sqrt 2) / (4^k Gamma(2k - 1/2) / sqrt(pi))
//! c'_k = -2^{2-2k} sqrt(2) b(1/sqrt 2) sqrt(pi) / (2k - 2)!
//! ```

use crate::algfun::AlgFun;
use crate::catalog::{CatalogError, CatalogSet, Reading};
use crate::poly::Poly;
use crate::qsqrt2::QSqrt2;
use crate::series::factorial;
use crate::stdform::{normalize_to_standard_form, StandardForm, StdFormError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;
use thiserror::Error;

/// Working precision in bits for every float in this module.
pub const PREC: u32 = 128;

#[derive(Debug, Error)]
pub enum AsymError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    StdForm(#[from] StdFormError),
    #[error("order must be 1 or 2, got {0}")]
    Order(u32),
    #[error("k must be at least 1")]
    ZeroK,
}

/// `Gamma(m + 1/2) / sqrt(pi) = (2m)! / (4^m m!)`.
pub fn gamma_half_over_sqrt_pi(m: u32) -> BigRational {
    let num = factorial(2 * m as usize);
    let den = BigInt::from(4).pow(m) * factorial(m as usize);
    BigRational::new(num, den)
}

/// `p(1/sqrt 2)` as an element of Q(sqrt 2).
pub fn eval_at_rho(p: &Poly) -> QSqrt2 {
    let mut even = BigRational::zero();
    let mut odd = BigRational::zero();
    for (i, c) in p.coeffs().iter().enumerate() {
        // (1/sqrt 2)^i = 2^{-i/2}; for odd i this is sqrt(2) * 2^{-(i+1)/2}
        let half_pow = BigRational::new(BigInt::one(), BigInt::from(2).pow(i.div_ceil(2) as u32));
        if i % 2 == 0 {
            even += c * half_pow;
        } else {
            odd += c * half_pow;
        }
    }
    QSqrt2::new(even, odd)
}

/// Exact constants of the two-term expansion for one `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexConstants {
    pub k: u32,
    /// The constant of the first-order estimate written with the parity factor.
    pub d: QSqrt2,
    /// `c'_k / sqrt(pi)`.
    pub second_over_sqrt_pi: QSqrt2,
}

impl VertexConstants {
    pub fn from_standard_form(sf: &StandardForm, k: u32) -> Result<Self, AsymError> {
        if k == 0 {
            return Err(AsymError::ZeroK);
        }
        let sf = if sf.h < 2 * k { sf.rescaled(2 * k) } else { sf.clone() };
        if sf.h != 2 * k {
            // a larger exponent would change the growth rate itself
            return Err(StdFormError::NonConforming(format!("exponent h = {} for k = {k}", sf.h)).into());
        }
        let gamma = gamma_half_over_sqrt_pi(2 * k - 1);
        let four_k = BigRational::from_integer(BigInt::from(4).pow(k));
        let d = eval_at_rho(&sf.a).scale(&(BigRational::from_integer(2.into()) / (four_k * gamma)));
        let scale = -BigRational::new(BigInt::from(4), BigInt::from(4).pow(k) * factorial(2 * k as usize - 2));
        let second = &eval_at_rho(&sf.b) * &QSqrt2::sqrt2_times(BigRational::one());
        Ok(VertexConstants { k, d, second_over_sqrt_pi: second.scale(&scale) })
    }

    pub fn from_algfun(g: &AlgFun, k: u32) -> Result<Self, AsymError> {
        if k == 0 {
            return Err(AsymError::ZeroK);
        }
        Self::from_standard_form(&normalize_to_standard_form(g, k)?, k)
    }

    /// From the assembled catalog total for `k`.
    pub fn from_catalogs(cs: &CatalogSet, k: u32, r: Reading) -> Result<Self, AsymError> {
        Self::from_algfun(&cs.assemble_total(k, r)?, k)
    }

    pub fn leading(&self) -> QSqrt2 {
        self.d.scale(&BigRational::from_integer(2.into()))
    }
}

/// `d_k` recovered from the built-in catalogs.
pub fn dk_exact(k: u32) -> Result<QSqrt2, AsymError> {
    Ok(VertexConstants::from_catalogs(&CatalogSet::builtin(), k, Reading::Adjudicated)?.d)
}

/// The second-order coefficients as printed, over `sqrt(pi)`, for `k = 1, 2, 3`.
pub fn printed_second_order(k: u32) -> Option<BigRational> {
    match k {
        1 => Some(BigRational::new((-1).into(), 2.into())),
        2 => Some(BigRational::new((-1).into(), 8.into())),
        3 => Some(BigRational::new((-1).into(), 64.into())),
        _ => None,
    }
}

pub fn float(x: f64) -> Float {
    Float::with_val(PREC, x)
}

pub fn float_int(x: &BigInt) -> Float {
    Float::with_val(PREC, Float::parse(x.to_string()).expect("decimal integer"))
}

pub fn float_rat(x: &BigRational) -> Float {
    float_int(x.numer()) / float_int(x.denom())
}

pub fn float_qsqrt2(x: &QSqrt2) -> Float {
    let r2 = Float::with_val(PREC, 2).sqrt();
    float_rat(&x.a) + float_rat(&x.b) * r2
}

fn sqrt_pi() -> Float {
    Float::with_val(PREC, Constant::Pi).sqrt()
}

/// `ln((sqrt 2 / e)^n n^{n + 2k - 1})`.
fn ln_vertex_scale(k: u32, n: u64) -> Float {
    let nf = Float::with_val(PREC, n);
    let ln_rho = Float::with_val(PREC, 2).ln() / 2u32 - 1u32;
    ln_rho * n + nf.ln() * (n + 2 * k as u64 - 1)
}

/// `sign(c) exp(ln|c| + ln_scale)`; the magnitude never leaves log space.
fn scaled(c: Float, ln_scale: Float) -> Float {
    if c.is_zero() {
        return c;
    }
    let neg = c.is_sign_negative();
    let v = (c.abs().ln() + ln_scale).exp();
    if neg {
        -v
    } else {
        v
    }
}

/// Vertex-labelled estimate of order 1 or 2; zero for even `n`.
pub fn asym_vertex(c: &VertexConstants, n: u64, order: u32) -> Result<Float, AsymError> {
    if !(1..=2).contains(&order) {
        return Err(AsymError::Order(order));
    }
    if n % 2 == 0 || n == 0 {
        return Ok(Float::new(PREC));
    }
    let mut coef = float_qsqrt2(&c.leading());
    if order == 2 {
        coef += float_qsqrt2(&c.second_over_sqrt_pi) * sqrt_pi() / Float::with_val(PREC, n).sqrt();
    }
    Ok(scaled(coef, ln_vertex_scale(c.k, n)))
}

/// First-order leaf-labelled estimate `2^{3k-1} d_k (2/e)^l l^{l + 2k - 1}`.
pub fn asym_leaf(c: &VertexConstants, l: u64) -> Float {
    let k = c.k;
    let coef = float_qsqrt2(&c.d) * Float::with_val(PREC, 2).pow(3 * k - 1);
    let lf = Float::with_val(PREC, l);
    let ln_scale = (Float::with_val(PREC, 2).ln() - 1u32) * l + lf.ln() * (l + 2 * k as u64 - 1);
    scaled(coef, ln_scale)
}

/// `ln(x!)` at working precision.
pub fn ln_factorial(x: u64) -> Float {
    Float::with_val(PREC, x + 1).ln_gamma()
}

/// `(l!/n!) 2 d_k (sqrt 2/e)^n n^{n+2k-1}` with `n = 2l + 2k - 1`: the vertex estimate
/// carried over to leaf labels by dividing out the interior labellings. Its ratio to
/// [`asym_leaf`] tends to 1.
pub fn leaf_from_vertex(c: &VertexConstants, l: u64) -> Float {
    let n = 2 * l + 2 * c.k as u64 - 1;
    let ln_scale = ln_vertex_scale(c.k, n) + ln_factorial(l) - ln_factorial(n);
    scaled(float_qsqrt2(&c.leading()), ln_scale)
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticEstimate {
    pub k: u32,
    /// `n` for vertex labels, `l` for leaf labels.
    pub size: u64,
    pub order: u32,
    pub value: String,
    pub relative_error: Option<f64>,
}

impl AsymptoticEstimate {
    pub fn vertex(c: &VertexConstants, n: u64, order: u32, exact: Option<&BigInt>) -> Result<Self, AsymError> {
        let v = asym_vertex(c, n, order)?;
        Ok(AsymptoticEstimate {
            k: c.k,
            size: n,
            order,
            relative_error: exact.map(|e| relative_error(&v, e)),
            value: format_float(&v),
        })
    }
}

/// `|estimate / exact - 1|`; infinite when `exact` is zero and the estimate is not.
pub fn relative_error(estimate: &Float, exact: &BigInt) -> f64 {
    if exact.is_zero() {
        return if estimate.is_zero() { 0.0 } else { f64::INFINITY };
    }
    (Float::with_val(PREC, estimate / float_int(exact)) - 1u32).abs().to_f64()
}

/// Scientific notation with 20 significant digits.
pub fn format_float(x: &Float) -> String {
    x.to_string_radix(10, Some(20))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub k: u32,
    pub n: u64,
    pub exact: String,
    pub est1: String,
    pub est2: String,
    pub rel_err1: f64,
    pub rel_err2: f64,
    /// `(exact / ((sqrt 2/e)^n n^{n+2k-1}) - 2 d_k) sqrt(n)`, to set against `c'_k`.
    pub fitted_residual: f64,
}

/// One row per `(n, exact count)` pair; odd `n` only make sense.
pub fn convergence_table(c: &VertexConstants, exact: &[(u64, BigInt)]) -> Result<Vec<ConvergenceRow>, AsymError> {
    exact
        .iter()
        .map(|(n, g)| {
            let e1 = asym_vertex(c, *n, 1)?;
            let e2 = asym_vertex(c, *n, 2)?;
            Ok(ConvergenceRow {
                k: c.k,
                n: *n,
                exact: g.to_string(),
                rel_err1: relative_error(&e1, g),
                rel_err2: relative_error(&e2, g),
                est1: format_float(&e1),
                est2: format_float(&e2),
                fitted_residual: fitted_residual(c, *n, g).to_f64(),
            })
        })
        .collect()
}

pub fn fitted_residual(c: &VertexConstants, n: u64, exact: &BigInt) -> Float {
    let normalised = (float_int(exact).ln() - ln_vertex_scale(c.k, n)).exp();
    (normalised - float_qsqrt2(&c.leading())) * Float::with_val(PREC, n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn gamma_at_half_integers() {
        assert_eq!(gamma_half_over_sqrt_pi(0), rat(1, 1));
        assert_eq!(gamma_half_over_sqrt_pi(1), rat(1, 2));
        assert_eq!(gamma_half_over_sqrt_pi(3), rat(15, 8));
        assert_eq!(gamma_half_over_sqrt_pi(5), rat(945, 32));
    }

    #[test]
    fn rho_evaluation_splits_parities() {
        // 1 + z + z^2 + z^3 at 1/sqrt 2 = 3/2 + (3/4) sqrt 2
        let p = Poly::from_ints(&[1, 1, 1, 1]);
        assert_eq!(eval_at_rho(&p), QSqrt2::new(rat(3, 2), rat(3, 4)));
    }

    #[test]
    fn even_n_is_zero_and_bad_order_rejected() {
        let c = VertexConstants::from_catalogs(&CatalogSet::builtin(), 1, Reading::Adjudicated).unwrap();
        assert!(asym_vertex(&c, 20, 1).unwrap().is_zero());
        assert!(matches!(asym_vertex(&c, 21, 3), Err(AsymError::Order(3))));
    }

    #[test]
    fn constants_match_the_printed_values() {
        for (k, d, c2) in [(1, rat(1, 4), rat(-1, 2)), (2, rat(1, 32), rat(-1, 8)), (3, rat(1, 384), rat(-1, 64))] {
            let c = VertexConstants::from_catalogs(&CatalogSet::builtin(), k, Reading::Adjudicated).unwrap();
            assert_eq!(c.d, QSqrt2::sqrt2_times(d), "k={k}");
            assert_eq!(c.second_over_sqrt_pi, QSqrt2::rational(c2.clone()), "k={k}");
            assert_eq!(printed_second_order(k), Some(c2));
        }
    }

    #[test]
    fn leaf_estimate_is_positive_at_one() {
        let c = VertexConstants::from_catalogs(&CatalogSet::builtin(), 1, Reading::Adjudicated).unwrap();
        let v = asym_leaf(&c, 1);
        assert!(v.is_finite() && v > 0);
    }

    #[test]
    fn empty_table() {
        let c = VertexConstants::from_catalogs(&CatalogSet::builtin(), 1, Reading::Adjudicated).unwrap();
        assert!(convergence_table(&c, &[]).unwrap().is_empty());
    }
}
