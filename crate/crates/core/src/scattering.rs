//! Scattering scalars, Plancherel densities and boundary transfer multipliers of the
//! rank-one spherical cases, as products of Tate gamma factors.
//!
//! Characters of `A_X` are parametrized along a primitive cocharacter. For the SL2
//! cases that is `α̌`; for `G_m \ PGL2` it is `α̌/2`, so `α̌` acts as the square.
//! Half-integral `s` appears only in the torus case; there symbolic values are rational
//! functions of `z` and `u = q^{1/2}` (the variable `U`), with `q` eliminated.

use serde::Serialize;

use crate::arith::{NumC, RatFunc, Scalar, Var};
use crate::chars::{gamma_value, MultChar};
use crate::conv::ConvolutionKernel;
use crate::error::{PtwError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SphericalCase {
    /// `(N, ψ) \ SL2`.
    Whittaker,
    /// `G_m \ PGL2`.
    TorusQuotient,
    /// `SL2` under `SL2 × SL2`.
    GroupCase,
    /// `(N, ψ) \ PGL2`, the partner of the torus quotient.
    WhittakerPgl2,
}

/// `γ(χ ∘ k, s, ψ^{sign})` with `k` a multiple of the primitive cocharacter and `s = two_s / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GammaTerm {
    pub k: i64,
    pub two_s: i64,
    pub psi_sign: i32,
}

const fn g(k: i64, two_s: i64, psi_sign: i32) -> GammaTerm {
    GammaTerm { k, two_s, psi_sign }
}

impl SphericalCase {
    pub const ALL: [SphericalCase; 4] = [SphericalCase::Whittaker, SphericalCase::TorusQuotient, SphericalCase::GroupCase, SphericalCase::WhittakerPgl2];

    /// `α̌` as a multiple of the primitive cocharacter.
    pub fn coroot(self) -> i64 {
        match self {
            SphericalCase::Whittaker | SphericalCase::GroupCase => 1,
            SphericalCase::TorusQuotient | SphericalCase::WhittakerPgl2 => 2,
        }
    }

    /// `δ^{1/2}` on the primitive cocharacter is `|·|^{two_s / 2}`.
    pub fn half_delta_two_s(self) -> i64 {
        match self {
            SphericalCase::Whittaker | SphericalCase::GroupCase => 2,
            SphericalCase::TorusQuotient | SphericalCase::WhittakerPgl2 => 1,
        }
    }

    pub fn half_integral(self) -> bool {
        self == SphericalCase::TorusQuotient
    }

    /// Factors of the scalar multiple of the Radon transform in the scattering operator.
    pub fn scattering_terms(self) -> Vec<GammaTerm> {
        let a = self.coroot();
        match self {
            SphericalCase::Whittaker | SphericalCase::WhittakerPgl2 => vec![g(-a, 0, 1)],
            SphericalCase::TorusQuotient => vec![g(1, 1, -1), g(1, 1, 1), g(-a, 0, 1)],
            SphericalCase::GroupCase => vec![g(a, 0, -1), g(-a, 0, 1)],
        }
    }

    /// Factors of the Plancherel density `μ_X`.
    pub fn plancherel_terms(self) -> Vec<GammaTerm> {
        let a = self.coroot();
        match self {
            SphericalCase::Whittaker | SphericalCase::WhittakerPgl2 => vec![g(a, 0, 1)],
            SphericalCase::TorusQuotient => vec![g(-1, 1, -1), g(-1, 1, 1), g(a, 0, 1)],
            SphericalCase::GroupCase => vec![g(-a, 0, -1), g(a, 0, 1)],
        }
    }
}

fn sym_term(t: &GammaTerm, z: &RatFunc, half: bool) -> Result<RatFunc> {
    let zk = z.pow(t.k);
    if t.two_s % 2 != 0 && !half {
        return Err(PtwError::Invalid("half-integral s outside the torus case".into()));
    }
    let qs = if half { RatFunc::var_pow(Var::U, -t.two_s) } else { RatFunc::q_pow(-t.two_s / 2) };
    let chi = MultChar::unramified(2, Scalar::Symbolic(zk))?;
    // q^{-1} inside the factor is Q^{-1}; in the half-integral convention Q = U^2.
    let v = gamma_value::<RatFunc>(&chi, &qs, t.psi_sign)?;
    if half {
        v.compose(Var::Q, &RatFunc::var_pow(Var::U, 2))
    } else {
        Ok(v)
    }
}

fn num_term(t: &GammaTerm, chi: &MultChar) -> Result<NumC> {
    let p = chi.p();
    let qs = NumC::real((p as f64).powf(-(t.two_s as f64) / 2.0));
    gamma_value::<NumC>(&chi.compose_power(t.k), &qs, t.psi_sign)
}

/// `Π γ(χ ∘ k_i, s_i, ψ^{±})`.
pub fn eval_terms(terms: &[GammaTerm], chi: &MultChar, half: bool) -> Result<Scalar> {
    match &chi.z {
        Scalar::Symbolic(z) => {
            if !chi.is_unramified() {
                return Err(PtwError::SymbolicRamified);
            }
            let mut acc = RatFunc::one();
            for t in terms {
                acc = acc.mul(&sym_term(t, z, half)?);
            }
            Ok(Scalar::Symbolic(acc))
        }
        Scalar::Numeric(_) => {
            let mut acc = NumC::ONE;
            for t in terms {
                acc = acc * num_term(t, chi)?;
            }
            Ok(Scalar::Numeric(acc))
        }
    }
}

pub fn scattering_scalar(case: SphericalCase, chi: &MultChar) -> Result<Scalar> {
    eval_terms(&case.scattering_terms(), chi, case.half_integral())
}

pub fn plancherel_density(case: SphericalCase, chi: &MultChar) -> Result<Scalar> {
    eval_terms(&case.plancherel_terms(), chi, case.half_integral())
}

/// Rewrites every factor with `k < 0` through `γ(η, s, ψ) = 1 / γ(η^{-1}, 1 - s, ψ^{-1})`,
/// returning `(numerator terms, denominator terms)`.
pub fn duality_normal_form(terms: &[GammaTerm]) -> (Vec<GammaTerm>, Vec<GammaTerm>) {
    let (mut num, mut den) = (vec![], vec![]);
    for t in terms {
        if t.k < 0 {
            den.push(g(-t.k, 2 - t.two_s, -t.psi_sign));
        } else {
            num.push(*t);
        }
    }
    (num, den)
}

/// Evaluates a normal form `Π num / Π den`.
pub fn eval_normal_form(nf: &(Vec<GammaTerm>, Vec<GammaTerm>), chi: &MultChar, half: bool) -> Result<Scalar> {
    eval_terms(&nf.0, chi, half)?.div(&eval_terms(&nf.1, chi, half)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// Kuznetsov for SL2 against the group.
    Rudnick,
    /// Kuznetsov for PGL2 against `G_m \ PGL2`.
    Torus,
}

impl BoundaryCase {
    fn pair(self) -> (SphericalCase, SphericalCase) {
        match self {
            BoundaryCase::Rudnick => (SphericalCase::Whittaker, SphericalCase::GroupCase),
            BoundaryCase::Torus => (SphericalCase::WhittakerPgl2, SphericalCase::TorusQuotient),
        }
    }
}

/// The Mellin multiplier of the boundary transfer: `γ(χ, α̌, 0, ψ)` for Rudnick,
/// `γ(χ, α̌/2, 0, ψ)^2` for the torus, from the Fourier-convolution kernels.
pub fn boundary_multiplier(case: BoundaryCase, chi: &MultChar) -> Result<Scalar> {
    let p = chi.p();
    let symbolic = chi.z.is_symbolic();
    let kern = ConvolutionKernel::d1(p, symbolic);
    let reps = match case {
        BoundaryCase::Rudnick => 1,
        BoundaryCase::Torus => 2,
    };
    match &chi.z {
        Scalar::Symbolic(z) => {
            if !chi.is_unramified() {
                return Err(PtwError::SymbolicRamified);
            }
            let m = kern.multiplier::<RatFunc>(&chi.tame)?.to_ratfunc()?.compose(Var::Z, z)?;
            Ok(Scalar::Symbolic(m.pow(reps)))
        }
        Scalar::Numeric(z) => {
            let m = kern.multiplier::<NumC>(&chi.tame)?.eval(z)?;
            Ok(Scalar::Numeric(m.powi(reps)))
        }
    }
}

/// `μ_X / μ_Y` at `χ δ^{-1/2}`, times `χ(-1)` in the torus case for the negated coordinate.
pub fn boundary_ratio(case: BoundaryCase, chi: &MultChar) -> Result<Scalar> {
    let (x, y) = case.pair();
    let shift = -x.half_delta_two_s();
    let shifted = shift_char(chi, shift)?;
    let half = shift % 2 != 0;
    let mx = eval_terms(&x.plancherel_terms(), &shifted, half)?;
    let my = eval_terms(&y.plancherel_terms(), &shifted, half)?;
    let mut r = mx.div(&my)?;
    if case == BoundaryCase::Torus {
        let sign: NumC = chi.tame.value(crate::field::pz(chi.p(), chi.conductor()).max(2) - 1)?;
        r = match r {
            Scalar::Symbolic(f) => Scalar::Symbolic(f),
            Scalar::Numeric(c) => Scalar::Numeric(c * sign),
        };
    }
    Ok(r)
}

/// `χ |·|^{two_s / 2}`; in the symbolic regime with odd `two_s` the factor is `u^{-two_s}`.
pub fn shift_char(chi: &MultChar, two_s: i64) -> Result<MultChar> {
    let p = chi.p();
    let z = match &chi.z {
        Scalar::Symbolic(z) => Scalar::Symbolic(if two_s % 2 == 0 { z.mul(&RatFunc::q_pow(-two_s / 2)) } else { z.mul(&RatFunc::var_pow(Var::U, -two_s)) }),
        Scalar::Numeric(z) => Scalar::Numeric(*z * NumC::real((p as f64).powf(-(two_s as f64) / 2.0))),
    };
    Ok(MultChar { tame: chi.tame.clone(), z })
}

/// Writes a `Q`-rational function in the `q = u^2` convention.
pub fn to_sqrt_q(f: &RatFunc) -> Result<RatFunc> {
    f.compose(Var::Q, &RatFunc::var_pow(Var::U, 2))
}

/// One row of a scattering table at a numeric point `z`.
#[derive(Clone, Debug, Serialize)]
pub struct ScatteringRow {
    pub case: SphericalCase,
    pub z: NumC,
    pub scattering: Option<NumC>,
    pub plancherel: Option<NumC>,
}

pub fn scattering_table(p: u64, zs: &[NumC]) -> Result<Vec<ScatteringRow>> {
    let mut out = vec![];
    for case in SphericalCase::ALL {
        for z in zs {
            let chi = MultChar::unramified(p, Scalar::Numeric(*z))?;
            let ok = |r: Result<Scalar>| -> Result<Option<NumC>> {
                match r {
                    Ok(s) => Ok(Some(s.as_numc()?)),
                    Err(PtwError::PoleHit) => Ok(None),
                    Err(e) => Err(e),
                }
            };
            out.push(ScatteringRow { case, z: *z, scattering: ok(scattering_scalar(case, &chi))?, plancherel: ok(plancherel_density(case, &chi))? });
        }
    }
    Ok(out)
}

/// Rational `q^{e}` in the torus convention is `u^{2e}`; handy for tests.
pub fn sqrt_q_pow(e2: i64) -> RatFunc {
    RatFunc::var_pow(Var::U, e2)
}
