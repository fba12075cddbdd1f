use proptest::prelude::*;

use ptw_core::arith::{p_pow, rat, Coeff, Cyclo, NumC, Rat, Scalar};
use ptw_core::chars::{gamma_value, MultChar};
use ptw_core::field::Ball;
use ptw_core::oracle::riemann_sum;
use ptw_core::plane::*;

fn ball(p: u64, c: Rat, n: i64) -> Ball {
    Ball::new(p, &c, n).unwrap()
}

fn cell(p: u64, c1: Rat, n1: i64, c2: Rat, n2: i64) -> Cell {
    Cell::new(ball(p, c1, n1), ball(p, c2, n2)).unwrap()
}

fn pt(a: Rat, b: Rat) -> Point {
    (a, b)
}

fn window_points(p: u64) -> Vec<Point> {
    let q = rat(p as i64, 1);
    let qi = rat(1, p as i64);
    vec![
        pt(rat(0, 1), rat(1, 1)),
        pt(rat(1, 1), rat(0, 1)),
        pt(rat(1, 1), rat(1, 1)),
        pt(qi.clone(), rat(2, 1)),
        pt(q.clone(), rat(1, 1)),
        pt(&qi * rat(2, 1), qi.clone()),
        pt(rat(1, 1), q),
        pt(rat(0, 1), qi),
    ]
}

fn random_function(p: u64, seeds: &[(u8, u8, u8, i8)]) -> PlaneFunction<Cyclo> {
    let mut f = PlaneFunction::zero(p);
    for (a, b, n, c) in seeds {
        let lv = (*n % 3) as i64 - 1;
        let c1 = rat(*a as i64 % 9, 3);
        let c2 = rat(*b as i64 % 9, 3);
        f.add_cell(cell(p, c1, lv, c2, lv.max(0)), Cyclo::rational(rat(*c as i64, 1)));
    }
    f
}

#[test]
fn fourier_of_unit_cells() {
    let p = 3;
    let unit = PlaneFunction::<Cyclo>::indicator(cell(p, rat(0, 1), 0, rat(0, 1), 0));
    assert_eq!(fourier_2d(&unit, 1).unwrap(), unit);
    let f = PlaneFunction::<Cyclo>::indicator(cell(p, rat(0, 1), 1, rat(0, 1), 0));
    let expect = PlaneFunction::<Cyclo>::indicator(cell(p, rat(0, 1), 0, rat(0, 1), -1)).scale(&Cyclo::rational(rat(1, 3)));
    assert_eq!(fourier_2d(&f, 1).unwrap(), expect);
}

#[test]
fn fourier_against_riemann_sums() {
    let p = 3;
    let phis = [cell(p, rat(0, 1), 1, rat(0, 1), 0), cell(p, rat(1, 3), 0, rat(2, 1), 1)];
    for c in phis {
        let phi = PlaneFunction::<Cyclo>::indicator(c);
        let f = fourier_2d(&phi, 1).unwrap();
        for w in window_points(p) {
            let inner = |x: &Rat| -> ptw_core::Result<NumC> {
                riemann_sum::<NumC>(p, 1, 2, |y| {
                    let v = pt(x.clone(), y.clone());
                    let val = phi.eval(&v).to_complex();
                    Ok(val * NumC::psi(p, &omega(&v, &w))?)
                })
            };
            let oracle = riemann_sum::<NumC>(p, 1, 2, inner).unwrap();
            assert!(f.eval(&w).to_complex().dist(oracle) < 1e-10, "{w:?}");
            assert_eq!(f.eval(&w), phi.fourier_at(&w, 1).unwrap());
        }
    }
}

#[test]
fn overlapping_cells_are_split() {
    let p = 3;
    let mut f = PlaneFunction::<Cyclo>::zero(p);
    let a = cell(p, rat(0, 1), 0, rat(0, 1), 0);
    let b = cell(p, rat(1, 1), 1, rat(0, 1), -1);
    f.add_cell(a.clone(), Cyclo::rational(rat(2, 1)));
    f.add_cell(b.clone(), Cyclo::rational(rat(-1, 1)));
    let cells: Vec<&Cell> = f.cells().map(|(c, _)| c).collect();
    for (i, x) in cells.iter().enumerate() {
        for y in &cells[i + 1..] {
            assert!(!x.overlaps(y));
        }
    }
    for (x, y) in [(0, 0), (1, 0), (1, 1), (4, 3), (2, 1)] {
        let v = pt(rat(x, 1), rat(y, 3));
        let mut naive = Cyclo::zero();
        if a.contains(&v) {
            naive = naive.add(&Cyclo::rational(rat(2, 1)));
        }
        if b.contains(&v) {
            naive = naive.sub(&Cyclo::one());
        }
        assert_eq!(f.eval(&v), naive, "{v:?}");
    }
    assert_eq!(f.sub(&f).len(), 0);
}

#[test]
fn radon_values() {
    let p = 3;
    let unit = PlaneFunction::<Cyclo>::indicator(cell(p, rat(0, 1), 0, rat(0, 1), 0));
    assert_eq!(radon_2d(&unit, &pt(rat(0, 1), rat(1, 1))).unwrap(), Cyclo::one());
    assert_eq!(radon_2d(&unit, &pt(rat(0, 1), rat(1, 3))).unwrap(), Cyclo::rational(rat(1, 3)));
    assert_eq!(radon_2d(&unit, &pt(rat(0, 1), rat(3, 1))).unwrap(), Cyclo::zero());
    assert!(radon_2d(&PlaneFunction::<Cyclo>::zero(p), &pt(rat(1, 1), rat(0, 1))).unwrap().is_zero());
    // Line integrals against a Riemann sum along the line.
    let phi = random_function(p, &[(1, 2, 1, 1), (4, 0, 2, -2), (0, 7, 0, 3)]);
    for v in window_points(p) {
        let u = dual_point(p, &v).unwrap();
        let oracle = riemann_sum::<Cyclo>(p, 3, 3, |z| Ok(phi.eval(&pt(&u.0 - z * &v.0, &u.1 - z * &v.1)))).unwrap();
        assert_eq!(radon_2d(&phi, &v).unwrap(), oracle, "{v:?}");
    }
}

#[test]
fn radon_fourier_on_the_cell_basis() {
    let p = 3;
    let pts = window_points(p);
    let mut opposite_fails = false;
    for c in cell_basis(p).unwrap() {
        let phi = PlaneFunction::<Cyclo>::indicator(c);
        assert!(verify_radon_fourier(&phi, &pts, 1).unwrap().holds(0.0));
        opposite_fails |= !verify_radon_fourier(&phi, &pts, -1).unwrap().holds(0.0);
    }
    // ψ(a) and ψ^{-1}(a) agree only on even functions.
    assert!(opposite_fails);
    let zero = PlaneFunction::<Cyclo>::zero(p);
    assert!(verify_radon_fourier(&zero, &pts, 1).unwrap().holds(0.0));
}

#[test]
fn radon_fourier_numeric_shifted_cell() {
    let p = 5;
    let phi = PlaneFunction::<NumC>::indicator(cell(p, rat(3, 5), 0, rat(1, 1), 1));
    assert!(verify_radon_fourier(&phi, &window_points(p), 1).unwrap().holds(1e-10));
}

#[test]
fn jacquet_trivial_phase_is_radon() {
    let p = 3;
    let c = cell(p, rat(1, 1), 1, rat(0, 1), 1);
    let mut w = WhittakerPlaneFunction::<Cyclo>::zero(p);
    w.insert(c.clone(), Cyclo::one()).unwrap();
    let v = pt(rat(0, 1), rat(1, 1));
    let phi = PlaneFunction::<Cyclo>::indicator(c);
    assert_eq!(jacquet_integral(&w, &v).unwrap(), radon_2d(&phi, &v).unwrap());
    assert!(jacquet_integral(&WhittakerPlaneFunction::<Cyclo>::zero(p), &v).unwrap().is_zero());
    // Cells across |w_x| = |w_y| have no single section.
    let bad = cell(p, rat(0, 1), 0, rat(0, 1), 0);
    assert!(WhittakerPlaneFunction::<Cyclo>::zero(p).insert(bad, Cyclo::one()).is_err());
}

#[test]
fn whittaker_equivariance() {
    let p = 3;
    let mut w = WhittakerPlaneFunction::<Cyclo>::zero(p);
    w.insert(cell(p, rat(2, 1), 1, rat(1, 1), 1), Cyclo::one()).unwrap();
    let wp = pt(rat(2, 1), rat(1, 1));
    let u = section(p, &wp).unwrap();
    for x in [rat(1, 3), rat(2, 9), rat(5, 1)] {
        let ux = pt(&u.0 - &x * &wp.0, &u.1 - &x * &wp.1);
        let lhs = w.eval(&wp, &ux).unwrap();
        let rhs = w.eval(&wp, &u).unwrap().mul(&Cyclo::psi(p, &x).unwrap());
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn jacquet_integral_against_line_sums() {
    let p = 3;
    let mut w = WhittakerPlaneFunction::<Cyclo>::zero(p);
    for (i, c) in whittaker_basis(p).unwrap().into_iter().enumerate() {
        w.insert(c, Cyclo::from_int(i as i64 + 1)).unwrap();
    }
    let mut nonzero = 0;
    for v in window_points(p) {
        let u1 = dual_point(p, &v).unwrap();
        let direct = jacquet_integral(&w, &v).unwrap();
        nonzero += !direct.is_zero() as usize;
        let summed = riemann_sum::<Cyclo>(p, 2, 5, |z| w.eval(&pt(&u1.0 - z * &v.0, &u1.1 - z * &v.1), &v)).unwrap();
        assert!(direct.deviation(&summed) < 1e-12, "{v:?}: {direct} vs {summed}");
    }
    assert!(nonzero >= 4);
}

#[test]
fn jacquet_fourier_exact_at_three() {
    let p = 3;
    let pts = window_points(p);
    for c in whittaker_basis(p).unwrap().into_iter().take(3) {
        let mut w = WhittakerPlaneFunction::<Cyclo>::zero(p);
        w.insert(c, Cyclo::one()).unwrap();
        assert!(verify_jacquet_fourier(&w, 2, 1, &pts).unwrap().holds(0.0));
        for far in [pt(rat(1, 27), rat(1, 1)), pt(rat(2, 1), rat(1, 81)), pt(rat(1, 9), rat(1, 9))] {
            assert!(jacquet_integral(&w, &far).unwrap().is_zero());
        }
        // Too small a box cuts the support.
        assert!(verify_jacquet_fourier(&w, 1, 1, &pts).is_err());
    }
}

#[test]
fn jacquet_adjoint_identity() {
    let p = 3;
    let mut at = vec![];
    for v in window_points(p) {
        let u = section(p, &v).unwrap();
        for x in [rat(0, 1), rat(1, 3), rat(2, 1)] {
            at.push((v.clone(), pt(&u.0 - &x * &v.0, &u.1 - &x * &v.1)));
        }
    }
    for c in cell_basis(p).unwrap() {
        let phi = PlaneFunction::<Cyclo>::indicator(c);
        assert!(verify_jacquet_adjoint(&phi, &at).unwrap().holds(0.0));
    }
}

#[test]
fn spectral_ratio_is_gamma() {
    let p = 3;
    let phis = [cell(p, rat(1, 1), 1, rat(0, 1), 0), cell(p, rat(1, 3), 0, rat(2, 1), 1), cell(p, rat(0, 1), -1, rat(0, 1), 0)];
    for c in phis {
        let phi = PlaneFunction::<NumC>::indicator(c);
        for z in [NumC::new(0.3, 0.5), NumC::cis(0.7), NumC::new(-1.4, 0.2)] {
            let chi = MultChar::unramified(p, Scalar::Numeric(z)).unwrap();
            let g = gamma_value::<NumC>(&chi, &NumC::ONE, 1).unwrap();
            for v in &window_points(p)[..4] {
                let (f, r) = spectral_components(&phi, v, z).unwrap();
                assert!(f.dist(g * r) < 1e-9, "{v:?} {z:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn fourier_is_an_involution(seeds in proptest::collection::vec((0u8..9, 0u8..9, 0u8..3, -3i8..4), 1..4)) {
        let phi = random_function(3, &seeds);
        let f = fourier_2d(&phi, 1).unwrap();
        prop_assert_eq!(fourier_2d(&f, 1).unwrap().sub(&phi).len(), 0);
        // ω is alternating, so the opposite sign returns Φ(-v).
        let reflected = phi.act(&rat(-1, 1)).unwrap();
        prop_assert_eq!(fourier_2d(&f, -1).unwrap().sub(&reflected).len(), 0);
    }

    #[test]
    fn radon_is_anti_equivariant(seeds in proptest::collection::vec((0u8..9, 0u8..9, 0u8..3, -3i8..4), 1..3),
                                 k in -1i64..2, u in 1i64..9, vi in 0usize..8) {
        prop_assume!(u % 3 != 0);
        let p = 3;
        let phi = random_function(p, &seeds);
        let a = p_pow(p, k) * rat(u, 1);
        let v = window_points(p)[vi].clone();
        let lhs = radon_2d(&phi.act(&a).unwrap(), &v).unwrap();
        let moved = radon_2d(&phi, &pt(&v.0 / &a, &v.1 / &a)).unwrap();
        prop_assert_eq!(lhs, moved.scale(&p_pow(p, k)));
    }
}
