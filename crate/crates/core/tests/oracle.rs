use num::{One, Zero};
use ptw_core::arith::{p_pow, rat, Cyclo, NumC, Rat, RatFunc, Var};
use ptw_core::field::Ball;
use ptw_core::oracle::*;

#[test]
fn kloosterman_small() {
    assert_eq!(kloosterman(3, 1, 1, 1).to_rat(), Some(rat(-1, 1)));
}

#[test]
fn group_orders() {
    for p in [2u64, 3, 5, 7] {
        for k in 1..=2 {
            FiniteGroupTable::new(p, k).unwrap().sl2_order().unwrap();
        }
    }
}

#[test]
fn trace_fibers_partition() {
    let p = 3;
    let total: Rat = (0..3).map(|c| trace_fiber_count(&Ball::new(p, &rat(c, 1), 1).unwrap(), p, 1).unwrap()).sum();
    assert_eq!(total, Rat::one());
    assert_eq!(trace_fiber_count(&Ball::new(p, &Rat::zero(), 0).unwrap(), p, 1).unwrap(), Rat::one());
    // refinement stability
    for c in 0..3 {
        let coarse = trace_fiber_count(&Ball::new(p, &rat(c, 1), 1).unwrap(), p, 1).unwrap();
        let fine: Rat = (0..3).map(|j| trace_fiber_count(&Ball::new(p, &rat(c + 3 * j, 1), 2).unwrap(), p, 2).unwrap()).sum();
        assert_eq!(coarse, fine);
    }
}

#[test]
fn hecke_mass_total() {
    // vol(K t_m K) = q^{2m}(1 + 1/q) for m >= 1.
    let p = 3;
    for m in 1..=2u32 {
        let all = Ball::new(p, &Rat::zero(), -(m as i64)).unwrap();
        let v = hecke_trace_mass(p, m, &all).unwrap();
        assert_eq!(v, p_pow(p, 2 * m as i64) * (Rat::one() + p_pow(p, -1)));
    }
}

#[test]
fn satake_m1() {
    let s = satake_oracle(3, 1);
    let q = RatFunc::int(3);
    let z = RatFunc::z();
    let expect = q.mul(&z).add(&q.mul(&z.inv().unwrap())).add(&RatFunc::int(2));
    assert_eq!(s, expect);
}

#[test]
fn spherical_v_minus_one() {
    for p in [2u64, 3, 5] {
        let s = spherical_oracle(p, -1).unwrap();
        let q = RatFunc::q();
        let qi = q.inv().unwrap();
        let z = RatFunc::z();
        let num = qi.sub(&qi.mul(&qi)).add(&qi.mul(&z)).add(&qi.mul(&z.inv().unwrap()));
        let expect = num.div(&RatFunc::one().add(&qi)).unwrap().substitute(&[(Var::Q, rat(p as i64, 1))]).unwrap();
        assert_eq!(s, expect, "p={p}");
    }
}

#[test]
fn pushforward_closed_form() {
    // e^{-m α̌}, m >= 1: Z q^m on |ζ| = q^m and -Z q^{m-2} on |ζ| = q^{m-1}.
    let p = 3;
    let z2 = Rat::one() / (Rat::one() - p_pow(p, -2));
    for m in 1..=2u32 {
        for a in -1..=(m as i64 + 1) {
            for u in [1i64, 2, 4] {
                let zeta = p_pow(p, -a) * rat(u, 1);
                let d = pushforward_density_oracle(p, m, &zeta).unwrap();
                let expect = if a == m as i64 {
                    &z2 * p_pow(p, m as i64)
                } else if a == m as i64 - 1 {
                    -&z2 * p_pow(p, m as i64 - 2)
                } else {
                    Rat::zero()
                };
                assert_eq!(d.to_rat(), Some(expect), "m={m} a={a} u={u}");
            }
        }
    }
}

#[test]
fn orbital_unit_shell_and_kloosterman() {
    let p = 3;
    assert_eq!(kloosterman_orbital(p, 0, &rat(1, 1), 4).unwrap(), Cyclo::one());
    for j in 1..=2u32 {
        for w in [1i64, 2, 4, 5] {
            let zeta = p_pow(p, j as i64) / rat(w, 1);
            let o = kloosterman_orbital(p, 0, &zeta, 4).unwrap();
            assert_eq!(o, kloosterman(p, j, w * w, 1), "j={j} w={w}");
        }
    }
}

#[test]
fn riemann_examples() {
    let p = 3;
    let one: NumC = riemann_sum(p, 0, 0, |x| Ok(if ptw_core::arith::val_rat(p, x).map(|v| v >= 0).unwrap_or(true) { NumC::ONE } else { NumC::ZERO })).unwrap();
    assert!((one.re - 1.0).abs() < 1e-12);
}
