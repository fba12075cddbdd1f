use ptw_core::arith::{rat, NumC, RatFunc, Scalar, Var};
use ptw_core::chars::{MultChar, TameChar};
use ptw_core::conv::*;
use ptw_core::field::UnitCoset;
use ptw_core::measures::{ExtendedMeasure, GermNorm, GmMeasure, ShellTable, TailGerm, ZeroGerm};
use ptw_core::mellin::{inverse_mellin, PoleField};

// The direct route counts residues, so symbolic values are compared at q = p.
fn at_p<C: PoleField>(p: u64, c: &C) -> C {
    match (c as &dyn std::any::Any).downcast_ref::<RatFunc>() {
        Some(r) => {
            let s = r.substitute(&[(Var::Q, rat(p as i64, 1))]).unwrap();
            (&s as &dyn std::any::Any).downcast_ref::<C>().unwrap().clone()
        }
        None => c.clone(),
    }
}

fn routes_agree<C: PoleField + std::fmt::Debug + 'static>(f: &ExtendedMeasure<C>, k: &ConvolutionKernel, lo: i64, hi: i64) -> f64 {
    let spec = fourier_convolve_spectral(f, k).unwrap();
    let back = inverse_mellin(&spec).unwrap();
    let direct = fourier_convolve_shell(f, k, lo, hi).unwrap();
    let mut worst = 0f64;
    for v in lo..=hi {
        let a = back.shell(v).unwrap();
        let b = direct.shell(v);
        let lvl = a.level.max(b.level);
        let (a, b) = (a.refine(f.p(), lvl), b.refine(f.p(), lvl));
        for (x, y) in a.vals.iter().zip(&b.vals) {
            worst = worst.max(at_p(f.p(), x).deviation(&at_p(f.p(), y)));
        }
    }
    worst
}

#[test]
fn shell_integral_examples() {
    let chi = MultChar::unramified(3, Scalar::Symbolic(RatFunc::one())).unwrap();
    let s = |xi| shell_integral::<RatFunc>(&chi, 0, &xi).unwrap();
    assert_eq!(s(rat(1, 1)), RatFunc::one().sub(&RatFunc::q_pow(-1)));
    assert_eq!(s(rat(1, 3)), RatFunc::q_pow(-1).neg());
    assert!(s(rat(1, 9)).is_zero());
}

#[test]
fn symbolic_routes() {
    let p = 3;
    let uchi = MultChar::unramified(p, Scalar::Symbolic(RatFunc::u())).unwrap();
    let mut cases = 0;
    for k in [1i64, -1] {
        for zk in [RatFunc::one(), RatFunc::w()] {
            let kern = ConvolutionKernel::new(k, MultChar::unramified(p, Scalar::Symbolic(zk.clone())).unwrap(), Scalar::Symbolic(RatFunc::u())).unwrap();
            for v in -1..=1 {
                let mut f = ExtendedMeasure::from_compact(GmMeasure::coset(p, &UnitCoset::shell(v), RatFunc::one()));
                if v == 1 {
                    f.tails.push(TailGerm::new(&uchi, 1, RatFunc::int(2), 1, GermNorm::SL2).unwrap());
                }
                if v == -1 {
                    f.zeros.push(ZeroGerm { tame: TameChar::trivial(p), rho: RatFunc::u().mul(&RatFunc::w()), log_power: 0, coeff: RatFunc::one(), start: 2 });
                }
                assert_eq!(routes_agree(&f, &kern, -4, 4), 0.0, "k={k} v={v}");
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 12);
}

#[test]
fn numeric_routes_ramified() {
    for p in [3u64, 5] {
        let chis: Vec<TameChar> = std::iter::once(TameChar::trivial(p)).chain(TameChar::all_of_conductor(p, 1)).collect();
        for k in [1i64, -1, 2] {
            for t in chis.iter().take(3) {
                let kern = ConvolutionKernel::new(k, MultChar::new(t.clone(), Scalar::Numeric(NumC::new(0.5, 0.3))).unwrap(), Scalar::Numeric(NumC::new(0.4, -0.2))).unwrap();
                let mut vals = vec![NumC::ZERO; p as usize];
                for (i, v) in vals.iter_mut().enumerate().skip(1) {
                    *v = NumC::new(i as f64, 1.0 / i as f64);
                }
                let mut m = GmMeasure::zero(p);
                m.add_shell(0, &ShellTable { level: 1, vals });
                m.add_coset(&UnitCoset::shell(-1), &NumC::real(0.5));
                let f = ExtendedMeasure::from_compact(m);
                let d = routes_agree(&f, &kern, -4, 4);
                assert!(d < 1e-9, "p={p} k={k}: {d}");
            }
        }
    }
}
