use gennet::algfun::AlgFun;
use gennet::jet::{Marker, MarkerJet};
use gennet::poly::{int, rat, Poly};
use gennet::series::series_expand;
use proptest::prelude::*;

fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-4i64..=4, 0..=max_deg + 1).prop_map(|c| Poly::from_ints(&c))
}

/// Denominators with a nonzero constant term, so every value is analytic at 0.
fn denom() -> impl Strategy<Value = Poly> {
    (prop_oneof![Just(-2i64), Just(-1), Just(1), Just(3)], prop::collection::vec(-3i64..=3, 0..=3)).prop_map(|(c0, rest)| {
        let mut c = vec![c0];
        c.extend(rest);
        Poly::from_ints(&c)
    })
}

fn alg() -> impl Strategy<Value = AlgFun> {
    (poly(4), poly(4), denom()).prop_map(|(p, q, r)| AlgFun::new(p, q, r))
}

const N: usize = 10;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(x in alg(), y in alg(), w in alg()) {
        prop_assert_eq!(&(&x * &y) * &w, &x * &(&y * &w));
        prop_assert_eq!(&x * &(&y + &w), &(&x * &y) + &(&x * &w));
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert!((&x - &x).is_zero());
        if !x.is_zero() {
            prop_assert!((&x * &x.inv().unwrap()).is_one());
            prop_assert_eq!((&y.div(&x).unwrap()) * &x, y.clone());
        }
    }

    #[test]
    fn canonical_form_is_unique(p in poly(3), q in poly(3), r in denom(), f in denom()) {
        let x = AlgFun::new(p.clone(), q.clone(), r.clone());
        // scaling all three parts by a common factor changes nothing
        let y = AlgFun::new(&p * &f, &q * &f, &r * &f);
        prop_assert_eq!(&x, &y);
        prop_assert_eq!(AlgFun::new(x.p().clone(), x.q().clone(), x.r().clone()), x.clone());
        if !x.is_zero() {
            prop_assert!(x.r().lead() == int(1));
        }
    }

    #[test]
    fn expansion_is_a_ring_homomorphism(x in alg(), y in alg()) {
        let ex = series_expand(&x, N).unwrap();
        let ey = series_expand(&y, N).unwrap();
        prop_assert_eq!(series_expand(&(&x * &y), N).unwrap(), ex.mul(&ey));
        prop_assert_eq!(series_expand(&(&x + &y), N).unwrap(), ex.add(&ey));
    }

    #[test]
    fn jet_sqrt_squares_back(f in alg(), g in alg(), h in alg()) {
        let ms = [Marker::new("a", 1), Marker::new("b", 2)];
        let a = MarkerJet::var(&ms, "a").unwrap();
        let b = MarkerJet::var(&ms, "b").unwrap();
        let x = MarkerJet::constant(&ms, AlgFun::radicand())
            .add(&a.scale(&f)).unwrap()
            .add(&b.scale(&g)).unwrap()
            .add(&a.mul(&b).unwrap().scale(&h)).unwrap();
        let r = x.sqrt().unwrap();
        prop_assert_eq!(r.base(), AlgFun::s());
        prop_assert_eq!(r.mul(&r).unwrap(), x);
    }

    #[test]
    fn jet_inverse(f in alg(), c in alg()) {
        prop_assume!(!c.is_zero());
        let ms = [Marker::new("g", 2)];
        let y = MarkerJet::var(&ms, "g").unwrap();
        let x = MarkerJet::constant(&ms, c).add(&y.scale(&f)).unwrap();
        prop_assert_eq!(x.mul(&x.inv().unwrap()).unwrap(), MarkerJet::one(&ms));
    }
}

#[test]
fn extraction_is_differentiation() {
    // (1 + zy)/(1 - zy): first derivative at 0 is 2z, second is 4z^2
    let ms = [Marker::new("y", 2)];
    let y = MarkerJet::var(&ms, "y").unwrap();
    let zy = y.scale(&AlgFun::z());
    let one = MarkerJet::one(&ms);
    let f = one.add(&zy).unwrap().div(&one.sub(&zy).unwrap()).unwrap();
    assert!(f.extract(&[0]).unwrap().is_one());
    assert_eq!(f.extract(&[1]).unwrap(), AlgFun::z().scale(&int(2)));
    assert_eq!(f.extract(&[2]).unwrap(), AlgFun::z_pow(2).scale(&int(4)));

    // 1/(1 - s y) with cap 1: derivative s
    let ms = [Marker::new("y", 1)];
    let y = MarkerJet::var(&ms, "y").unwrap();
    let g = MarkerJet::one(&ms).sub(&y.scale(&AlgFun::s())).unwrap().inv().unwrap();
    assert_eq!(g.extract(&[1]).unwrap(), AlgFun::s());

    // z^2 y / (1 - 2z^2) with a cap-2 marker: second derivative vanishes
    let ms = [Marker::new("y", 2)];
    let y = MarkerJet::var(&ms, "y").unwrap();
    let h = y.scale(&AlgFun::z_pow(2).div(&AlgFun::radicand()).unwrap());
    assert_eq!(h.extract(&[1]).unwrap(), AlgFun::new(Poly::from_ints(&[0, 0, 1]), Poly::zero(), Poly::radicand()));
    assert!(h.extract(&[2]).unwrap().is_zero());
}

#[test]
fn expansion_examples() {
    let s = series_expand(&AlgFun::s(), 4).unwrap();
    assert_eq!(s.coeffs(), &[int(1), int(0), int(-1), int(0), rat(-1, 2)]);
    let m0 = (&AlgFun::one() - &AlgFun::s()).div(&AlgFun::z()).unwrap();
    assert_eq!(series_expand(&m0, 4).unwrap().coeffs(), &[int(0), int(1), int(0), rat(1, 2), int(0)]);
    let geo = AlgFun::one().div(&AlgFun::radicand()).unwrap();
    assert_eq!(series_expand(&geo, 4).unwrap().coeffs(), &[int(1), int(0), int(2), int(0), int(4)]);
}
