use ptw_core::arith::{NumC, RatFunc, Scalar, Var};
use ptw_core::chars::{MultChar, TameChar};
use ptw_core::scattering::*;
use ptw_core::PtwError;

fn sym() -> MultChar {
    MultChar::unramified_symbolic(3)
}

fn rf(s: Scalar) -> RatFunc {
    s.as_ratfunc().unwrap().clone()
}

fn num(s: Scalar) -> NumC {
    s.as_numc().unwrap()
}

// γ(z^k, 0) = (1 - z^k) / (1 - q^{-1} z^{-k})
fn gamma0(k: i64) -> RatFunc {
    let z = RatFunc::z().pow(k);
    RatFunc::one().sub(&z).div(&RatFunc::one().sub(&RatFunc::q_pow(-1).mul(&z.inv().unwrap()))).unwrap()
}

fn numeric_chars(p: u64) -> Vec<MultChar> {
    let zs = [NumC::new(0.3, 0.4), NumC::new(-1.7, 0.2), NumC::new(0.6, -0.8)];
    let mut tames = vec![TameChar::trivial(p)];
    for n in 1..=2 {
        tames.extend(TameChar::all_of_conductor(p, n));
    }
    let mut out = vec![];
    for t in tames {
        for z in zs {
            out.push(MultChar { tame: t.clone(), z: Scalar::Numeric(z) });
        }
    }
    out
}

#[test]
fn whittaker_scalars() {
    assert_eq!(rf(scattering_scalar(SphericalCase::Whittaker, &sym()).unwrap()), gamma0(-1));
    assert_eq!(rf(plancherel_density(SphericalCase::Whittaker, &sym()).unwrap()), gamma0(1));
    assert_eq!(rf(plancherel_density(SphericalCase::GroupCase, &sym()).unwrap()), gamma0(-1).mul(&gamma0(1)));
    assert_eq!(rf(scattering_scalar(SphericalCase::WhittakerPgl2, &sym()).unwrap()), gamma0(-2));
}

#[test]
fn scattering_is_plancherel_at_the_reflected_character() {
    let chi = sym();
    let inv = chi.inverse().unwrap();
    for case in SphericalCase::ALL {
        assert_eq!(scattering_scalar(case, &chi).unwrap(), plancherel_density(case, &inv).unwrap(), "{case:?}");
    }
    for p in [3u64, 5] {
        for chi in numeric_chars(p) {
            let inv = chi.inverse().unwrap();
            for case in SphericalCase::ALL {
                let a = num(scattering_scalar(case, &chi).unwrap());
                let b = num(plancherel_density(case, &inv).unwrap());
                assert!(a.dist(b) < 1e-9 * (1.0 + a.abs()), "{case:?} p={p}");
            }
        }
    }
}

#[test]
fn gamma_duality() {
    let chi = sym();
    for k in [-2i64, -1, 1, 2] {
        for two_s in 0..=2 {
            for sign in [1, -1] {
                let t = [GammaTerm { k, two_s, psi_sign: sign }, GammaTerm { k: -k, two_s: 2 - two_s, psi_sign: -sign }];
                assert!(rf(eval_terms(&t, &chi, true).unwrap()).is_one(), "k={k} s={two_s}/2");
            }
        }
    }
    for p in [3u64, 5] {
        for chi in numeric_chars(p) {
            let t = [GammaTerm { k: 1, two_s: 1, psi_sign: 1 }, GammaTerm { k: -1, two_s: 1, psi_sign: -1 }];
            assert!(num(eval_terms(&t, &chi, true).unwrap()).dist(NumC::ONE) < 1e-9);
        }
    }
}

#[test]
fn duality_normal_forms_agree() {
    let chi = sym();
    for case in SphericalCase::ALL {
        let half = case.half_integral();
        for terms in [case.scattering_terms(), case.plancherel_terms()] {
            let nf = duality_normal_form(&terms);
            assert!(nf.0.iter().chain(&nf.1).all(|t| t.k > 0));
            assert_eq!(eval_normal_form(&nf, &chi, half).unwrap(), eval_terms(&terms, &chi, half).unwrap(), "{case:?}");
        }
    }
    // Two-fold scattering: S(χ) S(χ^{-1}) for the group case is the Whittaker product squared
    // up to the ψ-sign, which cancels for unramified χ.
    let inv = chi.inverse().unwrap();
    let two = |c: SphericalCase| rf(scattering_scalar(c, &chi).unwrap()).mul(&rf(scattering_scalar(c, &inv).unwrap()));
    let w = two(SphericalCase::Whittaker);
    assert_eq!(two(SphericalCase::GroupCase), w.mul(&w));
    assert_eq!(w, gamma0(1).mul(&gamma0(-1)));
}

#[test]
fn group_density_is_nonnegative_on_the_unitary_axis() {
    for p in [3u64, 5] {
        for i in 0..24 {
            let th = 0.1 + i as f64 * 0.26;
            let chi = MultChar::unramified(p, Scalar::Numeric(NumC::new(th.cos(), th.sin()))).unwrap();
            let m = num(plancherel_density(SphericalCase::GroupCase, &chi).unwrap());
            assert!(m.im.abs() < 1e-10 && m.re >= -1e-10, "{m:?}");
        }
    }
}

#[test]
fn poles_and_trivial_character() {
    let one = MultChar::unramified(3, Scalar::Numeric(NumC::ONE)).unwrap();
    assert!(num(scattering_scalar(SphericalCase::Whittaker, &one).unwrap()).abs() < 1e-12);
    assert!(num(plancherel_density(SphericalCase::GroupCase, &one).unwrap()).abs() < 1e-12);
    // γ(χ, -α̌, 0) has its pole at z^{-1} = q^{-1}, i.e. z = 3.
    let at_pole = MultChar::unramified(3, Scalar::Numeric(NumC::real(3.0))).unwrap();
    assert!(matches!(scattering_scalar(SphericalCase::Whittaker, &at_pole), Err(PtwError::PoleHit)));
    let ram = MultChar { tame: TameChar::quadratic(3).unwrap(), z: Scalar::Symbolic(RatFunc::z()) };
    assert!(matches!(scattering_scalar(SphericalCase::GroupCase, &ram), Err(PtwError::SymbolicRamified)));
}

#[test]
fn rudnick_boundary_multiplier() {
    let chi = sym();
    let m = rf(boundary_multiplier(BoundaryCase::Rudnick, &chi).unwrap());
    assert_eq!(m, gamma0(1));
    assert_eq!(m, rf(boundary_ratio(BoundaryCase::Rudnick, &chi).unwrap()));
    for p in [3u64, 5] {
        for chi in numeric_chars(p) {
            let a = num(boundary_multiplier(BoundaryCase::Rudnick, &chi).unwrap());
            let b = num(boundary_ratio(BoundaryCase::Rudnick, &chi).unwrap());
            assert!(a.dist(b) < 1e-9 * (1.0 + a.abs()), "p={p} cond={}", chi.conductor());
        }
    }
}

#[test]
fn torus_boundary_multiplier() {
    let chi = sym();
    let m = rf(boundary_multiplier(BoundaryCase::Torus, &chi).unwrap());
    assert_eq!(m, gamma0(1).mul(&gamma0(1)));
    let r = rf(boundary_ratio(BoundaryCase::Torus, &chi).unwrap());
    assert!(!r.contains(Var::Q));
    assert_eq!(to_sqrt_q(&m).unwrap(), r);
    let mut odd_seen = false;
    for p in [3u64, 5] {
        for chi in numeric_chars(p) {
            let a = num(boundary_multiplier(BoundaryCase::Torus, &chi).unwrap());
            let b = num(boundary_ratio(BoundaryCase::Torus, &chi).unwrap());
            assert!(a.dist(b) < 1e-9 * (1.0 + a.abs()), "p={p} cond={}", chi.conductor());
            // Without the χ(-1) factor the ratio is γ(χ,0,ψ) γ(χ,0,ψ^{-1}).
            let plain = [GammaTerm { k: 1, two_s: 0, psi_sign: 1 }, GammaTerm { k: 1, two_s: 0, psi_sign: -1 }];
            let c = num(eval_terms(&plain, &chi, false).unwrap());
            let sign: NumC = chi.tame.value(ptw_core::field::pz(p, chi.conductor()).max(2) - 1).unwrap();
            assert!((c * sign).dist(b) < 1e-9 * (1.0 + b.abs()));
            if sign.re < 0.0 {
                odd_seen = true;
                assert!(c.dist(b) > 1e-6);
            }
        }
    }
    assert!(odd_seen);
}

#[test]
fn table_rows() {
    let rows = scattering_table(3, &[NumC::new(0.5, 0.5), NumC::real(3.0)]).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().any(|r| r.scattering.is_none()));
}
