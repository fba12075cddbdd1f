use std::collections::BTreeMap;

use proptest::prelude::*;
use ptw_core::arith::scalar::{rf_evaluate, rf_normalize, Binding};
use ptw_core::arith::series::{rf_shell_expand, Direction};
use ptw_core::arith::{rat, rint, Cyclo, Poly, RatFunc, Scalar, Var};
use ptw_core::PtwError;

fn q() -> RatFunc {
    RatFunc::q()
}
fn z() -> RatFunc {
    RatFunc::z()
}
fn u() -> RatFunc {
    RatFunc::u()
}
fn one() -> RatFunc {
    RatFunc::one()
}

#[test]
fn normalize_cancels_common_factor() {
    let f = (z() * z() - one()).div(&(z() - one())).unwrap();
    assert_eq!(f, z() + one());
    let qi = q().inv().unwrap();
    let g = (one() - qi.clone() * qi.clone()).div(&(one() - qi)).unwrap();
    assert_eq!(g, (q() + one()).div(&q()).unwrap());
    let zero = RatFunc::new(Poly::zero(), (one() - z() * u()).numer().clone()).unwrap();
    assert!(zero.is_zero());
    assert_eq!(rf_normalize(&g).unwrap(), g);
}

#[test]
fn zero_denominator_rejected() {
    assert_eq!(RatFunc::new(Poly::one(), Poly::zero()), Err(PtwError::ZeroDenominator));
}

#[test]
fn evaluation_examples() {
    let f = one().div(&(one() - u())).unwrap();
    let mut b = BTreeMap::new();
    b.insert(Var::U, Binding::Exact(rat(1, 9)));
    assert_eq!(rf_evaluate(&f, &b).unwrap(), Scalar::Symbolic(RatFunc::constant(rat(9, 8))));

    let g = one().div(&(one() - z() * u())).unwrap();
    let mut b = BTreeMap::new();
    b.insert(Var::U, Binding::Exact(rint(1)));
    b.insert(Var::Z, Binding::Exact(rint(1)));
    assert_eq!(rf_evaluate(&g, &b), Err(PtwError::PoleHit));

    let qi = q().inv().unwrap();
    let h = (one() - qi.clone()).div(&(one() - qi.clone() * qi)).unwrap();
    let mut b = BTreeMap::new();
    b.insert(Var::Q, Binding::Exact(rint(3)));
    assert_eq!(rf_evaluate(&h, &b).unwrap(), Scalar::Symbolic(RatFunc::constant(rat(3, 4))));
    assert_eq!(rf_evaluate(&h, &BTreeMap::new()), Err(PtwError::UnboundVariable("q".into())));
}

#[test]
fn shell_expansion_examples() {
    let f = one().div(&(one() - u())).unwrap();
    let s = rf_shell_expand(&f, Var::U, Direction::AtZero, 4).unwrap();
    assert_eq!(s.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    assert!(s.iter().all(|x| x.1 == one()));
    let s = rf_shell_expand(&f, Var::U, Direction::AtInfinity, 3).unwrap();
    assert_eq!(s.iter().map(|x| x.0).collect::<Vec<_>>(), vec![-1, -2, -3]);
    assert!(s.iter().all(|x| x.1 == RatFunc::int(-1)));
}

#[test]
fn shell_expansion_matches_long_division() {
    // (1-u^2)/(1-u)^3 = (1+u)/(1-u)^2 = Σ (2k+1) u^k.
    let f = (one() - u() * u()).div(&(one() - u()).pow(3)).unwrap();
    let s = rf_shell_expand(&f, Var::U, Direction::AtZero, 4).unwrap();
    let got: Vec<RatFunc> = s.into_iter().map(|x| x.1).collect();
    assert_eq!(got, vec![RatFunc::int(1), RatFunc::int(3), RatFunc::int(5), RatFunc::int(7)]);
    let resum = got.iter().enumerate().fold(RatFunc::zero(), |a, (k, c)| a + c.mul(&u().pow(k as i64)));
    let diff = f - resum;
    assert!(diff.order_in(Var::U) >= 4);
}

#[test]
fn cyclotomic_relations() {
    let p = 3;
    let s = (0..3).fold(Cyclo::zero(), |a, i| a.add(&Cyclo::root(p, i, 1)));
    assert!(s.is_zero());
    let w = Cyclo::root(p, 1, 1);
    assert_eq!(w.mul(&w).mul(&w), Cyclo::one());
    // ζ_9^3 = ζ_3
    assert_eq!(Cyclo::root(3, 3, 2), Cyclo::root(3, 1, 1));
    // Gauss sum of the quadratic character mod 3 squares to -3.
    let g = Cyclo::root(3, 1, 1).sub(&Cyclo::root(3, 2, 1));
    assert_eq!(g.mul(&g), Cyclo::rational(rint(-3)));
    let c = Cyclo::root(2, 1, 2);
    assert_eq!(c.mul(&c), Cyclo::rational(rint(-1)));
}

fn small_rf() -> impl Strategy<Value = RatFunc> {
    let term = (-3i64..=3, 0u32..=2, 0u32..=2, 0u32..=1);
    let poly = proptest::collection::vec(term, 1..4).prop_map(|ts| Poly::from_terms(ts.into_iter().map(|(c, a, b, d)| ([a, b, d, 0], rint(c)))));
    (poly.clone(), poly).prop_filter_map("nonzero den", |(n, d)| RatFunc::new(n, d).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_axioms(a in small_rf(), b in small_rf(), c in small_rf()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        if !a.is_zero() {
            prop_assert_eq!(a.mul(&a.inv().unwrap()), RatFunc::one());
        }
        prop_assert_eq!(a.normalize(), a.clone());
    }

    #[test]
    fn evaluation_commutes_with_arithmetic(a in small_rf(), b in small_rf(), x in 2i64..7, y in 2i64..7) {
        let vals: BTreeMap<Var, ptw_core::arith::Rat> =
            [(Var::Q, rint(x)), (Var::Z, rat(1, y)), (Var::U, rat(y, x + 7)), (Var::W, rint(1))].into_iter().collect();
        if let (Ok(va), Ok(vb)) = (a.eval_rat(&vals), b.eval_rat(&vals)) {
            prop_assert_eq!(a.add(&b).eval_rat(&vals).unwrap(), &va + &vb);
            prop_assert_eq!(a.mul(&b).eval_rat(&vals).unwrap(), &va * &vb);
        }
    }

    #[test]
    fn expansion_resums(a in small_rf(), n in 3usize..7) {
        let a = a.compose(Var::Z, &RatFunc::int(2)).unwrap();
        if let Ok(s) = rf_shell_expand(&a, Var::U, Direction::AtZero, n) {
            if s.is_empty() {
                prop_assert!(a.is_zero());
                return Ok(());
            }
            let resum = s.iter().fold(RatFunc::zero(), |acc, (e, c)| acc + c.mul(&RatFunc::var_pow(Var::U, *e)));
            let e0 = s[0].0;
            let diff = a.sub(&resum);
            prop_assert!(diff.is_zero() || diff.order_in(Var::U) >= e0 + n as i64);
        }
    }

    #[test]
    fn gcd_recovers_common_factor(a in small_rf(), b in small_rf(), c in small_rf()) {
        let (a, b, c) = (a.numer().clone(), b.numer().clone(), c.numer().clone());
        prop_assume!(!a.is_zero() && !b.is_zero() && !c.is_zero());
        let g = ptw_core::arith::poly::gcd(&a.mul(&c), &b.mul(&c));
        prop_assert!(g.div_exact(&c.monic()).is_some());
        prop_assert!(a.mul(&c).div_exact(&g).is_some());
        prop_assert!(b.mul(&c).div_exact(&g).is_some());
    }
}
