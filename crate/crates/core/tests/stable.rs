use num::{One, Zero};
use proptest::prelude::*;

use ptw_core::arith::{p_pow, rat, Rat, RatFunc, Var};
use ptw_core::chars::MultChar;
use ptw_core::field::Ball;
use ptw_core::kuznetsov::*;
use ptw_core::oracle;
use ptw_core::stable::*;

fn basic(p: u64, m: u32) -> KuznetsovVector<RatFunc> {
    KuznetsovVector::basic_ad(RatFunc::q_pow(-1)).hecke_act(&HeckeElement::basis(p, m)).unwrap()
}

#[test]
fn trace_pushforward_values() {
    let p = 3;
    let all = Ball::new(p, &Rat::zero(), 0).unwrap();
    let at0 = Ball::new(p, &Rat::zero(), 1).unwrap();
    let t = trace_pushforward(p, 0, &[all.clone(), at0.clone()], None).unwrap();
    assert_eq!(t.masses[&all], Rat::one());
    // Trace 0 in SL2(F_3): one class, centralizer the order-4 nonsplit torus, 24 / 4 elements.
    assert_eq!(t.masses[&at0], rat(6, 24));
    assert_eq!(t.masses[&at0], oracle::trace_fiber_count(&at0, p, 1).unwrap());
    // Depth 1: volume q^2 (1 + 1/q) all on |t| <= q.
    let big = Ball::new(p, &Rat::zero(), -1).unwrap();
    let t1 = trace_pushforward(p, 1, &[big.clone(), all.clone()], None).unwrap();
    assert_eq!(t1.masses[&big], rat(12, 1));
    assert_eq!(&t1.masses[&big] - &t1.masses[&all], oracle::hecke_trace_mass(p, 1, &big).unwrap() - oracle::hecke_trace_mass(p, 1, &all).unwrap());
}

#[test]
fn identity_fundamental_lemma() {
    for p in [2u64, 3] {
        let rows = fundamental_lemma_rows(p, 0, &ball_window(p, 2, -2..=3).unwrap()).unwrap();
        for r in &rows {
            assert!(r.equal(), "p={p} {}: {} vs {}", r.ball, r.lhs, r.rhs);
        }
    }
}

#[test]
fn hecke_fundamental_lemma() {
    let p = 3;
    for m in 1..=2u32 {
        let rows = fundamental_lemma_rows(p, m, &ball_window(p, m as i64 + 1, -(m as i64) - 1..=2).unwrap()).unwrap();
        assert!(rows.iter().any(|r| !r.lhs.is_zero()));
        for r in &rows {
            assert!(r.equal(), "m={m} {}: {} vs {}", r.ball, r.lhs, r.rhs);
        }
    }
}

#[test]
fn kloosterman_shell_sum_matches_direct() {
    // Σ_W S(W^2, 1; p^j) ψ(c W / p^j) from the oracle's Kloosterman sums.
    let p = 3;
    for j in 1..=2u32 {
        let m = 3u64.pow(j);
        for c in [0i64, 1, 4, 7] {
            let mut acc = ptw_core::arith::Cyclo::zero();
            for w in (1..m).filter(|w| w % p != 0) {
                let s = oracle::kloosterman(p, j, (w * w) as i64, 1);
                acc = acc.add(&s.mul_root(p, (c as u64 * w) % m, j));
            }
            assert_eq!(kloosterman_shell_sum(p, j, &rat(c, 1)).unwrap(), acc.to_rat().unwrap(), "j={j} c={c}");
        }
    }
}

#[test]
fn calibration_and_character_identity() {
    let kern = StablePairingKernel::calibrate(3, 3).unwrap();
    let chi = MultChar::unramified_symbolic(3);
    let mu = HeckeTrace::new(3, 0, 7, Rat::one()).unwrap();
    assert_eq!(kern.pair(&mu, &chi, 0).unwrap(), RatFunc::one());
    let at3 = |f: RatFunc| f.substitute(&[(Var::Q, rat(3, 1))]).unwrap();
    for m in 0..=2u32 {
        let f = basic(3, m);
        let got = stable_pairing_of_transfer(&kern, &f, &chi).unwrap();
        assert_eq!(got, at3(bessel_character(&chi, &f).unwrap()), "m={m}");
    }
}

#[test]
fn pairing_kernel_is_symmetric() {
    let kern = StablePairingKernel { p: 3, levels: 3, norm: Rat::one() };
    for a in [rat(9, 1), rat(1, 3), rat(4, 1), rat(10, 1)] {
        let k = kern.kernel_at(&a).unwrap();
        assert_eq!(k, k.compose(Var::Z, &RatFunc::z().pow(-1)).unwrap());
        // a and 1/a give the same class.
        assert_eq!(k, kern.kernel_at(&a.recip()).unwrap());
    }
    assert_eq!(kern.kernel_at(&rat(1, 3)).unwrap().substitute(&[(Var::Z, Rat::one())]).unwrap(), RatFunc::constant(rat(2, 3)));
    assert!(kern.kernel_at(&Rat::one()).is_err());
}

#[test]
fn zero_measure_pairs_to_zero() {
    struct Zero3;
    impl TraceMassSource for Zero3 {
        fn prime(&self) -> u64 {
            3
        }
        fn mass(&self, _: &Ball) -> ptw_core::Result<Rat> {
            Ok(Rat::zero())
        }
    }
    let kern = StablePairingKernel { p: 3, levels: 3, norm: Rat::one() };
    assert!(kern.pair(&Zero3, &MultChar::unramified_symbolic(3), 0).unwrap().is_zero());
}

#[test]
fn unstable_germ_is_an_error() {
    // Mass q^{-j} on each split region does not have the q^{-2j}(α + β q^{-j}) shape.
    struct Wrong;
    impl TraceMassSource for Wrong {
        fn prime(&self) -> u64 {
            3
        }
        fn mass(&self, b: &Ball) -> ptw_core::Result<Rat> {
            Ok(if b.level() >= 2 { p_pow(3, -b.level() / 2) } else { Rat::zero() })
        }
    }
    let r = SplitProfile::measure(&Wrong, 0, 3);
    assert!(matches!(r, Err(ptw_core::PtwError::PrecisionExhausted(_))), "{r:?}");
}

#[test]
fn image_of_standard_is_compact() {
    let p = 3;
    for m in 0..=2u32 {
        let std = KuznetsovVector::<RatFunc>::standard(GroupTag::SL2).hecke_act(&HeckeElement::basis(p, m)).unwrap();
        let t = Transferred::new(&std, p).unwrap();
        // Outer shells reach |ζ| = q^{m+1}.
        assert!(image_regular(&t, m + 1, 3, 0).unwrap(), "m={m}");
    }
    let std = Transferred::new(&KuznetsovVector::<RatFunc>::standard(GroupTag::SL2), p).unwrap();
    assert!(!image_regular(&std, 0, 3, 0).unwrap());
    let f = Transferred::new(&basic(p, 1), p).unwrap();
    assert!(image_regular(&f, 1, 3, 0).unwrap());
}

#[test]
fn torus_multiplier_is_gamma_squared() {
    let p = 3;
    let f = KuznetsovVector::basic_std2(RatFunc::q_pow(-2), RatFunc::q_pow(-3)).realize(p, false).unwrap();
    let out = transfer_kuznetsov_to_torus_spectral(&f).unwrap();
    let base = ptw_core::mellin::mellin(&f).unwrap();
    let kern = ptw_core::conv::ConvolutionKernel::d1(p, true);
    for (eta, r) in &base.comps {
        let g = kern.multiplier::<RatFunc>(eta).unwrap();
        assert_eq!(out.component(eta), r.mul(&g).unwrap().mul(&g).unwrap());
    }
    let zero = ptw_core::measures::ExtendedMeasure::<RatFunc>::zero(p);
    assert!(transfer_kuznetsov_to_torus_spectral(&zero).unwrap().comps.iter().all(|(_, r)| r.is_zero()));
}

fn sl2_matrix() -> impl Strategy<Value = Mat2> {
    (-9i64..=9, 1i64..=9, -9i64..=9, 1i64..=9, -9i64..=9, 1i64..=9).prop_filter_map("a must be invertible", |(an, ad, bn, bd, cn, cd)| {
        if an == 0 {
            return None;
        }
        let (a, b, c) = (rat(an, ad), rat(bn, bd), rat(cn, cd));
        let d = (Rat::one() + &b * &c) / &a;
        Some([[a, b], [c, d]])
    })
}

#[test]
fn family_coordinate_fixed_points() {
    let id: Mat2 = [[Rat::one(), Rat::zero()], [Rat::zero(), Rat::one()]];
    assert_eq!(family_coordinate(&id, &id), rat(2, 1));
    assert!(family_coordinate_check(&[(id.clone(), id)]).ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]
    #[test]
    fn family_coordinate_is_trace_of_quotient(g1 in sl2_matrix(), g2 in sl2_matrix()) {
        let rep = family_coordinate_check(&[(g1, g2)]);
        prop_assert!(rep.ok(), "{:?}", rep.failures);
    }
}
