//! Closed forms against enumeration: Whittaker pushforwards, Fourier transforms of
//! ball indicators and character shell integrals. Every oracle value here is taken at
//! two mesh levels that must agree.

use serde::Serialize;

use crate::arith::{p_pow, rat, Coeff, Cyclo, NumC, Rat, RatFunc, Var};
use crate::chars::{MultChar, TameChar};
use crate::conv::shell_integral;
use crate::error::Result;
use crate::field::{Ball, UnitCoset};
use crate::kuznetsov::{pushforward_coset, GroupTag, WhittakerCosetElement};
use crate::measures::{additive_fourier, GaMeasure};
use crate::oracle::{pushforward_density_oracle, riemann_sum};

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyRow {
    pub family: &'static str,
    pub item: String,
    pub closed_form: NumC,
    pub oracle: NumC,
    pub deviation: f64,
}

impl ConsistencyRow {
    pub fn ok(&self, tol: f64) -> bool {
        self.deviation <= tol
    }
}

fn push_row<C: Coeff>(out: &mut Vec<ConsistencyRow>, family: &'static str, item: String, closed: &C, oracle: &C, p: u64) -> Result<()> {
    out.push(ConsistencyRow { family, item, closed_form: closed.to_numc(p)?, oracle: oracle.to_numc(p)?, deviation: closed.deviation(oracle) });
    Ok(())
}

/// SL2 pushforward of `e^{-m α̌}`, `m ≥ 1`, shell by shell against the orbital-integral oracle.
pub fn pushforward_rows(p: u64, max_m: u32) -> Result<Vec<ConsistencyRow>> {
    let mut out = vec![];
    for m in 1..=max_m {
        let f = pushforward_coset::<RatFunc>(WhittakerCosetElement { group: GroupTag::SL2, m }, p, false)?;
        for v in -(m as i64) - 1..=1 {
            for u in [1u64, 2, p + 1] {
                let zeta = p_pow(p, v) * rat(u as i64, 1);
                let closed = f.shell(v)?.at(p, u).substitute(&[(Var::Q, rat(p as i64, 1))])?;
                let closed = Cyclo::rational(closed.constant_value().ok_or(crate::PtwError::RegimeMismatch)?);
                let oracle = pushforward_density_oracle(p, m, &zeta)?;
                push_row(&mut out, "pushforward", format!("m={m} zeta={zeta}"), &closed, &oracle, p)?;
            }
        }
    }
    Ok(out)
}

fn sample_xis(p: u64) -> Vec<Rat> {
    let mut xs = vec![Rat::from_integer(0.into())];
    for e in -2..=2i64 {
        for u in [1i64, 2] {
            xs.push(p_pow(p, e) * rat(u, 1));
        }
    }
    xs
}

/// `FT(1_B)` from the phased-ball closed form against Riemann sums.
pub fn ball_fourier_rows(p: u64) -> Result<Vec<ConsistencyRow>> {
    let mut out = vec![];
    for level in -1..=2i64 {
        for c in [rat(0, 1), rat(1, 1), rat(1, p as i64)] {
            let b = Ball::new(p, &c, level)?;
            let ft = additive_fourier(&GaMeasure::ball(b.clone(), Cyclo::one()), 1)?;
            for xi in sample_xis(p) {
                let closed = ft.eval(&xi)?;
                let mesh = level.max(2);
                let oracle = riemann_sum::<Cyclo>(p, (-level).max(1), mesh, |x| if b.contains(x) { Cyclo::psi(p, &(x * &xi)) } else { Ok(Cyclo::zero()) })?;
                push_row(&mut out, "ball-fourier", format!("ball={b} xi={xi}"), &closed, &oracle, p)?;
            }
        }
    }
    Ok(out)
}

/// `∫_{|x| = q^{-m}} χ(x) ψ(x ξ) d^×x` against a Riemann sum of `χ(x) ψ(x ξ) |x|^{-1}`.
pub fn shell_integral_rows(p: u64) -> Result<Vec<ConsistencyRow>> {
    let mut out = vec![];
    let mut chars = vec![MultChar::unramified(p, crate::arith::Scalar::Numeric(NumC::new(0.6, 0.3)))?];
    for n in 1..=2u32 {
        let all = TameChar::all_of_conductor(p, n);
        for t in all.into_iter().take(2) {
            chars.push(MultChar::new(t, crate::arith::Scalar::Numeric(NumC::cis(0.4)))?);
        }
    }
    for chi in &chars {
        let cond = chi.conductor() as i64;
        for m in -1..=1i64 {
            for xi in sample_xis(p) {
                let closed: NumC = shell_integral(chi, m, &xi)?;
                let xv = crate::arith::val_rat(p, &xi).unwrap_or(0);
                let mesh = (m + cond.max(1)).max(-xv).max(m + 1);
                let oracle = riemann_sum::<NumC>(p, (-m).max(0), mesh, |x| match crate::arith::val_rat(p, x) {
                    Some(v) if v == m => {
                        let coset = UnitCoset::of(p, x, cond.max(1) as u32)?;
                        let cv: NumC = chi.value_on(&coset)?;
                        Ok(cv * NumC::psi(p, &(x * &xi))? * NumC::q_pow(p, m))
                    }
                    _ => Ok(NumC::ZERO),
                })?;
                push_row(&mut out, "shell-integral", format!("cond={cond} m={m} xi={xi}"), &closed, &oracle, p)?;
            }
        }
    }
    Ok(out)
}

/// All three families at one prime.
pub fn self_consistency(p: u64, max_m: u32) -> Result<Vec<ConsistencyRow>> {
    let mut rows = pushforward_rows(p, max_m)?;
    rows.extend(ball_fourier_rows(p)?);
    rows.extend(shell_integral_rows(p)?);
    Ok(rows)
}
