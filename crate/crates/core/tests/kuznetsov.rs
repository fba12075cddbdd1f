use std::collections::BTreeMap;

use ptw_core::arith::{p_pow, rat, Coeff, NumC, Rat, RatFunc, Var};
use ptw_core::chars::MultChar;
use ptw_core::kuznetsov::*;
use ptw_core::oracle;

fn at_q(p: u64, f: &RatFunc) -> RatFunc {
    f.substitute(&[(Var::Q, rat(p as i64, 1))]).unwrap()
}

fn const_at_q(p: u64, f: &RatFunc) -> Rat {
    at_q(p, f).constant_value().expect("constant")
}

#[test]
fn bessel_normalization() {
    let phi = spherical_coefficient(-1).unwrap();
    let q = RatFunc::q();
    let z = RatFunc::z();
    let qi = q.pow(-1);
    let expect = qi.sub(&q.pow(-2)).add(&qi.mul(&z)).add(&qi.mul(&z.pow(-1))).div(&RatFunc::one().add(&qi)).unwrap();
    assert_eq!(phi, expect);
    assert_eq!(RatFunc::one().sub(&phi), bessel_standard());
    assert_eq!(spherical_coefficient(0).unwrap(), RatFunc::one());
    assert_eq!(spherical_coefficient(3).unwrap(), RatFunc::one());
}

#[test]
fn spherical_matches_enumeration() {
    for p in [2u64, 3] {
        for v in [-1i64, -2] {
            let got = at_q(p, &spherical_coefficient(v).unwrap());
            assert_eq!(got, oracle::spherical_oracle(p, v).unwrap(), "p={p} v={v}");
        }
    }
    assert!(spherical_at(3, NumC::ZERO, -1).is_err());
}

#[test]
fn adjoint_tail_closed_form() {
    let u = RatFunc::u();
    let q = RatFunc::q();
    let one = RatFunc::one();
    let f = KuznetsovVector::basic_ad(u.clone());
    let z2 = one.sub(&q.pow(-2)).inv().unwrap();
    let c = z2.mul(&one.sub(&u.div(&q).unwrap())).div(&one.sub(&u.mul(&u))).unwrap();
    let real = f.realize(3, false).unwrap();
    for j in 1..=8 {
        let d = f.outer_shell(3, j).unwrap();
        assert_eq!(d.div(&q.mul(&u).pow(j)).unwrap(), c, "shell {j}");
        assert_eq!(real.shell(-j).unwrap().vals[0], d);
    }
    // Linear recursion from the denominator (1 - q u).
    for j in 0..10 {
        assert_eq!(f.outer_shell(3, j + 1).unwrap(), q.mul(&u).mul(&f.outer_shell(3, j).unwrap()));
    }
}

#[test]
fn adjoint_at_infinity_is_standard() {
    let f = KuznetsovVector::basic_ad(RatFunc::zero());
    let s = KuznetsovVector::<RatFunc>::standard(GroupTag::SL2);
    for j in 0..5 {
        assert_eq!(f.outer_shell(3, j).unwrap(), s.outer_shell(3, j).unwrap());
    }
}

#[test]
fn sl2_pushforward_against_oracle() {
    let p = 3;
    for m in 1..=3u32 {
        let f = pushforward_coset::<RatFunc>(WhittakerCosetElement { group: GroupTag::SL2, m }, p, false).unwrap();
        for v in -(m as i64) - 1..=2 {
            for unit in [1i64, 2, 4] {
                let zeta = p_pow(p, v) * rat(unit, 1);
                let o = oracle::pushforward_density_oracle(p, m, &zeta).unwrap().to_rat().unwrap();
                assert_eq!(const_at_q(p, &f.shell(v).unwrap().at(p, unit as u64)), o, "m={m} v={v}");
            }
        }
    }
    assert!(pushforward_coset::<RatFunc>(WhittakerCosetElement { group: GroupTag::SL2, m: 0 }, p, false).is_err());
}

#[test]
fn kloosterman_shells_against_orbital() {
    let p = 3;
    let f = pushforward_coset::<NumC>(WhittakerCosetElement { group: GroupTag::SL2, m: 0 }, p, true).unwrap();
    for v in 0..=3i64 {
        let t = f.shell(v).unwrap();
        for r in (1..27u64).filter(|r| r % 3 != 0) {
            let zeta = p_pow(p, v) * rat(r as i64, 1);
            let o = oracle::kloosterman_orbital(p, 0, &zeta, v as u32 + 2).unwrap().to_complex();
            let density = o.mul(&NumC::real(9.0 / 8.0 * 9f64.powi(-(v as i32))));
            assert!(t.at(p, r).dist(density) < 1e-10, "v={v} r={r}");
        }
    }
}

#[test]
fn pgl2_pushforwards() {
    let p = 3;
    for m in 1..=3u32 {
        let f = pushforward_coset::<RatFunc>(WhittakerCosetElement { group: GroupTag::PGL2, m }, p, true).unwrap();
        let z1 = rat(3, 2);
        let mut shells: Vec<i64> = f.compact.shells().map(|(v, _)| *v).collect();
        shells.sort();
        assert_eq!(shells, vec![-(m as i64), 2 - m as i64]);
        assert_eq!(f.shell(-(m as i64)).unwrap().vals[0], RatFunc::constant(&z1 * p_pow(p, m as i64)));
        assert_eq!(f.shell(2 - m as i64).unwrap().vals[0], RatFunc::constant(-&z1 * p_pow(p, m as i64 - 2)));
    }
    let f = pushforward_coset::<NumC>(WhittakerCosetElement { group: GroupTag::PGL2, m: 0 }, p, true).unwrap();
    let (_, prov) = f.near_zero.clone().unwrap();
    for v in 2..=4i64 {
        for r in [1u64, 2, 4, 5, 7] {
            let xi = p_pow(p, v) * rat(r as i64, 1);
            let o = oracle::pgl2_density_oracle(p, 0, &xi).unwrap().to_complex();
            assert!(prov.shell(v).unwrap().at(p, r).dist(o) < 1e-10, "v={v} r={r}");
        }
    }
    // ∫ density |ξ|^{-1} d^x ξ = ζ(1) ∫ O d^x ξ = ζ(1).
    let mut mass = NumC::ZERO;
    for v in 0..=8i64 {
        let t = f.shell(v).unwrap();
        mass = mass.add(&t.mass(p).mul(&NumC::real(3f64.powi(v as i32))));
    }
    assert!(mass.dist(NumC::real(1.5)) < 1e-10, "{mass:?}");
}

#[test]
fn std2_coefficients_against_series() {
    // c_m = [y^m] (1 - y^{-2}) Π (1 - a y^{±1})^{-1}, truncated double series.
    let (p, u, w) = (3u64, 0.3f64, -0.2f64);
    let f = |n: i64| -> f64 { (-200i64..=200).map(|k| u.powi(k.abs() as i32) / (1.0 - u * u) * w.powi((n - k).abs() as i32) / (1.0 - w * w)).sum() };
    let s = (p as f64).sqrt();
    let v = KuznetsovVector::basic_std2(NumC::real(u / s), NumC::real(w / s));
    for m in 0..6i64 {
        let c = f(m) - f(m + 2);
        let got = v.whittaker_coeff(p, m).unwrap().mul(&NumC::real(s.powi(m as i32)));
        assert!(got.dist(NumC::real(c)) < 1e-12, "m={m}");
    }
}

#[test]
fn std2_first_shells_against_oracle() {
    let p = 3;
    let (u, w) = (RatFunc::u(), RatFunc::w());
    let f = KuznetsovVector::basic_std2(u, w);
    let assembled = f.assemble_from_cosets(p, 5, true).unwrap();
    let real = f.realize(p, false).unwrap();
    for j in 0..3i64 {
        let a = at_q(p, &f.outer_shell(p, j).unwrap());
        assert_eq!(a, at_q(p, &assembled.shell(-j).vals[0]), "shell {j}");
        assert_eq!(f.outer_shell(p, j).unwrap(), real.shell(-j).unwrap().vals[0]);
    }
    // Specialized exponents.
    let g = KuznetsovVector::basic_std2(RatFunc::q_pow(-2), RatFunc::q_pow(-3));
    let s = g.assemble_from_cosets(p, 5, true).unwrap();
    for j in 0..3i64 {
        assert_eq!(at_q(p, &g.outer_shell(p, j).unwrap()), at_q(p, &s.shell(-j).vals[0]));
    }
}

#[test]
fn satake_basis_against_cosets() {
    for p in [2u64, 3] {
        for m in 1..=2u32 {
            let h = HeckeElement::<RatFunc>::basis(p, m);
            assert_eq!(at_q(p, &h.satake()), oracle::satake_oracle(p, m));
            for (k, c) in &h.coeffs {
                assert_eq!(h.coeff(-k), *c);
            }
        }
    }
    let bad = BTreeMap::from([(1, RatFunc::one())]);
    assert!(HeckeElement::new(GroupTag::SL2, bad).is_err());
    let id = KuznetsovVector::basic_ad(RatFunc::u());
    assert_eq!(id.hecke_act(&HeckeElement::identity(GroupTag::SL2)).unwrap(), id);
}

#[test]
fn hecke_action_against_cosets() {
    let p = 3;
    let f = KuznetsovVector::basic_ad(RatFunc::q_pow(-1));
    let n = 10;
    let beta: Vec<Rat> = (0..n).map(|m| const_at_q(p, &f.whittaker_coeff(p, m).unwrap())).collect();
    for m in 1..=2u32 {
        let h = HeckeElement::<RatFunc>::basis(p, m);
        let g = f.hecke_act(&h).unwrap();
        let geo = oracle::hecke_whittaker_oracle(p, m, &beta);
        for (k, b) in geo.iter().enumerate().take(4) {
            assert_eq!(b.to_rat().unwrap(), const_at_q(p, &g.whittaker_coeff(p, k as i64).unwrap()), "m={m} n={k}");
        }
        let z2 = rat(9, 8);
        let shell0 = &z2 * (geo[0].to_rat().unwrap() - geo[1].to_rat().unwrap() / rat(3, 1));
        assert_eq!(const_at_q(p, &g.outer_shell(p, 0).unwrap()), shell0);
    }
}

#[test]
fn bessel_values() {
    let chi = MultChar::unramified_symbolic(3);
    let s = KuznetsovVector::<RatFunc>::standard(GroupTag::SL2);
    assert_eq!(bessel_character(&chi, &s).unwrap(), bessel_standard());
    let f = KuznetsovVector::basic_ad(RatFunc::q_pow(-1));
    let zeta2 = RatFunc::one().sub(&RatFunc::q_pow(-2)).inv().unwrap();
    assert_eq!(bessel_character(&chi, &f).unwrap(), zeta2);
    let h = HeckeElement::<RatFunc>::basis(3, 1);
    let g = f.hecke_act(&h).unwrap();
    assert_eq!(bessel_character(&chi, &g).unwrap(), h.satake().mul(&zeta2));
    let zero = KuznetsovVector { hecke: HeckeElement::new(GroupTag::SL2, BTreeMap::new()).unwrap(), ..s };
    assert!(bessel_character(&chi, &zero).unwrap().is_zero());
}
