use num::Zero;
use ptw_core::arith::{NumC, Rat, RatFunc, Scalar};
use ptw_core::chars::{MultChar, TameChar};
use ptw_core::field::{Ball, UnitCoset};
use ptw_core::measures::{ExtendedMeasure, GaMeasure, GermNorm, GmMeasure, TailGerm};
use ptw_core::mellin::*;

fn ball_family(p: u64) -> Vec<Ball> {
    let mut out = vec![];
    for v in -3i64..=3 {
        for n in (v + 1).max(-3)..=(v + 3).min(3) {
            let c = ptw_core::arith::p_pow(p, v);
            out.push(Ball::new(p, &c, n).unwrap());
        }
    }
    for n in -3..=3 {
        out.push(Ball::new(p, &Rat::zero(), n).unwrap());
    }
    out
}

#[test]
fn functional_equation_symbolic() {
    let chi = MultChar::unramified_symbolic(3);
    for b in ball_family(3) {
        let phi = GaMeasure::ball(b.clone(), RatFunc::one());
        let r = verify_functional_equation(&phi, &chi, &RatFunc::u()).unwrap();
        assert_eq!(r.lhs, r.rhs, "ball {b}");
    }
}

#[test]
fn functional_equation_ramified() {
    for p in [3u64, 5] {
        for n in 1..=2 {
            for t in TameChar::all_of_conductor(p, n) {
                let chi = MultChar::new(t, Scalar::Numeric(NumC::new(0.6, 0.8))).unwrap();
                for b in ball_family(p) {
                    let phi = GaMeasure::ball(b.clone(), NumC::ONE);
                    let r = verify_functional_equation(&phi, &chi, &NumC::new(0.3, 0.2)).unwrap();
                    assert!(r.deviation < 1e-9, "p={p} ball {b}: {:?}", r);
                }
            }
        }
    }
}

#[test]
fn tate_examples() {
    let chi = MultChar::unramified_symbolic(3);
    let o = GaMeasure::ball(Ball::new(3, &Rat::zero(), 0).unwrap(), RatFunc::one());
    let z = tate_zeta(&o, &chi, &RatFunc::u()).unwrap();
    let expect = RatFunc::one().sub(&RatFunc::q_pow(-1)).div(&RatFunc::one().sub(&RatFunc::z().mul(&RatFunc::u()))).unwrap();
    assert_eq!(z, expect);
}

#[test]
fn residue() {
    for p in [3u64, 5] {
        let phi = GaMeasure::ball(Ball::new(p, &Rat::zero(), 1).unwrap(), NumC::ONE);
        let r = zeta_residue(&phi).unwrap();
        let q = p as f64;
        assert!((r.re - (1.0 - 1.0 / q) / q.ln()).abs() < 1e-9, "{r}");
        assert!(r.im.abs() < 1e-9);
    }
}

#[test]
fn mellin_roundtrip_tail() {
    let p = 3;
    let chi = MultChar::unramified(p, Scalar::Symbolic(RatFunc::u())).unwrap();
    for m in 0..3 {
        let g = TailGerm::new(&chi, m, RatFunc::one(), 0, GermNorm::SL2).unwrap();
        let mut f = ExtendedMeasure::<RatFunc>::zero(p);
        f.tails.push(g);
        f.compact = GmMeasure::coset(p, &UnitCoset::shell(2), RatFunc::int(5));
        let mm = mellin(&f).unwrap();
        let back = inverse_mellin(&mm).unwrap();
        for v in -6..=4 {
            assert_eq!(back.shell(v).unwrap(), f.shell(v).unwrap(), "m={m} v={v}");
        }
    }
}
