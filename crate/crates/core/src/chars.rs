//! Multiplicative characters of `Q_p^x` and their Tate local factors.

use std::sync::Arc;

use num::{BigInt, Integer, One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{frac_mod1, modinv_u64, rat, Coeff, Field, NumC, Rat, RatFunc, Scalar};
use crate::error::{PtwError, Result};
use crate::field::{pz, PAdicContext, Regime, UnitCoset};

/// Generators of `(Z/p^n)^x` with their orders.
pub fn unit_generators(p: u64, n: u32) -> Vec<(u64, u64)> {
    if n == 0 {
        return vec![];
    }
    let m = pz(p, n);
    if p == 2 {
        return match n {
            1 => vec![],
            2 => vec![(3, 2)],
            _ => vec![(m - 1, 2), (5, m / 4)],
        };
    }
    // A primitive root mod p^2 generates (Z/p^n)^x for every n.
    let phi = (p - 1) * pz(p, n - 1);
    let g = (2..p * p).find(|&g| g % p != 0 && multiplicative_order(g, p * p) == p * (p - 1)).expect("primitive root exists");
    vec![(g % m, phi)]
}

fn multiplicative_order(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 {
        x = mulmod(x, g, m);
        k += 1;
    }
    k
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// A character of `(Z/p^n)^x` of exact conductor `n`, stored as its angle table:
/// `chi(r) = exp(2 pi i angle[r])` for units `r mod p^n`.
#[derive(Clone, Debug)]
pub struct TameChar {
    p: u64,
    n: u32,
    angles: Arc<Vec<Rat>>,
}

impl PartialEq for TameChar {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.n == o.n && (Arc::ptr_eq(&self.angles, &o.angles) || self.angles == o.angles)
    }
}

impl TameChar {
    pub fn trivial(p: u64) -> TameChar {
        TameChar { p, n: 0, angles: Arc::new(vec![Rat::zero()]) }
    }

    /// The character sending the `i`-th generator of `(Z/p^n)^x` to `exp(2 pi i idx[i] / ord_i)`.
    /// Fails when the result does not have conductor exactly `n`.
    pub fn new(p: u64, n: u32, idx: &[u64]) -> Result<TameChar> {
        let gens = unit_generators(p, n);
        if gens.len() != idx.len() {
            return Err(PtwError::Invalid(format!("expected {} generator images", gens.len())));
        }
        let m = pz(p, n.max(1));
        let mut angles = vec![Rat::zero(); m as usize];
        let mut filled = vec![false; m as usize];
        // Walk the product of cyclic factors.
        let mut stack: Vec<(u64, Rat)> = vec![(1 % m, Rat::zero())];
        for (&(g, ord), &j) in gens.iter().zip(idx) {
            let mut next = Vec::with_capacity(stack.len() * ord as usize);
            for (x, a) in &stack {
                let mut y = *x;
                for e in 0..ord {
                    next.push((y, frac_mod1(&(a + rat((e * j) as i64, ord as i64)))));
                    y = mulmod(y, g, m);
                }
            }
            stack = next;
        }
        for (x, a) in stack {
            angles[x as usize] = a;
            filled[x as usize] = true;
        }
        let t = TameChar { p, n, angles: Arc::new(angles) };
        let c = t.true_conductor();
        if c != n {
            return Err(PtwError::Invalid(format!("character has conductor {c}, not {n}")));
        }
        Ok(t)
    }

    /// Builds a character from its values on units mod `p^level`, reducing to the true conductor.
    pub fn from_fn(p: u64, level: u32, f: impl Fn(u64) -> Rat) -> TameChar {
        let m = pz(p, level.max(1));
        let angles: Vec<Rat> = (0..m).map(|r| if r % p == 0 { Rat::zero() } else { frac_mod1(&f(r)) }).collect();
        let full = TameChar { p, n: level, angles: Arc::new(angles) };
        let c = full.true_conductor();
        full.restrict(c)
    }

    fn restrict(&self, c: u32) -> TameChar {
        if c == self.n {
            return self.clone();
        }
        let m = pz(self.p, c);
        let angles: Vec<Rat> = (0..m.max(1))
            .map(|r| {
                if c == 0 {
                    Rat::zero()
                } else if r % self.p == 0 {
                    Rat::zero()
                } else {
                    self.angles[r as usize].clone()
                }
            })
            .collect();
        TameChar { p: self.p, n: c, angles: Arc::new(if c == 0 { vec![Rat::zero()] } else { angles }) }
    }

    fn true_conductor(&self) -> u32 {
        let p = self.p;
        let n = self.n;
        if n == 0 {
            return 0;
        }
        let m = pz(p, n);
        // Smallest c with chi trivial on 1 + p^c mod p^n.
        for c in 0..n {
            let step = pz(p, c);
            let trivial = (0..m / step.max(1)).all(|i| {
                let r = if c == 0 { i } else { 1 + i * step };
                r % p == 0 || r >= m || self.angles[r as usize].is_zero()
            });
            if trivial {
                return c;
            }
        }
        n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn is_trivial(&self) -> bool {
        self.n == 0
    }

    /// Angle of `chi(r)` for a unit residue known modulo `p^k`, `k >= n`.
    pub fn angle(&self, r: u64) -> Rat {
        if self.n == 0 {
            return Rat::zero();
        }
        let m = pz(self.p, self.n);
        self.angles[(r % m) as usize].clone()
    }

    pub fn value<C: Coeff>(&self, r: u64) -> Result<C> {
        if self.n == 0 {
            return Ok(C::one());
        }
        C::cis(self.p, &self.angle(r))
    }

    pub fn inverse(&self) -> TameChar {
        if self.n == 0 {
            return self.clone();
        }
        let angles = self.angles.iter().map(|a| frac_mod1(&-a)).collect();
        TameChar { p: self.p, n: self.n, angles: Arc::new(angles) }
    }

    pub fn mul(&self, o: &TameChar) -> TameChar {
        let lvl = self.n.max(o.n);
        TameChar::from_fn(self.p, lvl, |r| self.angle(r) + o.angle(r))
    }

    /// `chi(x^k)`.
    pub fn power(&self, k: i64) -> TameChar {
        TameChar::from_fn(self.p, self.n, |r| self.angle(r) * Rat::from_integer(BigInt::from(k)))
    }

    /// Order of the character.
    pub fn order(&self) -> u64 {
        self.angles.iter().fold(1u64, |acc, a| {
            let d: u64 = a.denom().try_into().unwrap_or(1);
            acc.lcm(&d)
        })
    }

    /// Images of the standard generators, as indices `j` with `chi(g) = exp(2 pi i j / ord)`.
    pub fn generator_indices(&self) -> Vec<u64> {
        unit_generators(self.p, self.n)
            .iter()
            .map(|&(g, ord)| {
                let a = self.angle(g) * Rat::from_integer(BigInt::from(ord));
                a.to_integer().try_into().unwrap_or(0)
            })
            .collect()
    }

    /// Every character of exact conductor `n`.
    pub fn all_of_conductor(p: u64, n: u32) -> Vec<TameChar> {
        if n == 0 {
            return vec![TameChar::trivial(p)];
        }
        let gens = unit_generators(p, n);
        let mut idx_sets: Vec<Vec<u64>> = vec![vec![]];
        for &(_, ord) in &gens {
            idx_sets = idx_sets.into_iter().flat_map(|v| (0..ord).map(move |j| [v.clone(), vec![j]].concat())).collect();
        }
        idx_sets.into_iter().filter_map(|ix| TameChar::new(p, n, &ix).ok()).collect()
    }

    /// The Legendre symbol mod an odd prime.
    pub fn quadratic(p: u64) -> Result<TameChar> {
        if p == 2 {
            return Err(PtwError::Invalid("no quadratic character of conductor 1 at p = 2".into()));
        }
        TameChar::new(p, 1, &[(p - 1) / 2])
    }
}

/// A multiplicative character: tame part on units times an unramified parameter `z = chi(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultChar {
    pub tame: TameChar,
    pub z: Scalar,
}

#[derive(Serialize, Deserialize)]
pub struct MultCharJson {
    pub p: u64,
    pub n: u32,
    pub tame: Vec<u64>,
    pub z: Scalar,
}

impl MultChar {
    pub fn new(tame: TameChar, z: Scalar) -> Result<MultChar> {
        let zero = match &z {
            Scalar::Symbolic(f) => f.is_zero(),
            Scalar::Numeric(c) => c.abs() == 0.0,
        };
        if zero {
            return Err(PtwError::Invalid("unramified parameter must be nonzero".into()));
        }
        Ok(MultChar { tame, z })
    }

    /// Unramified character with symbolic parameter `z`.
    pub fn unramified_symbolic(p: u64) -> MultChar {
        MultChar { tame: TameChar::trivial(p), z: Scalar::Symbolic(RatFunc::z()) }
    }

    pub fn unramified(p: u64, z: Scalar) -> Result<MultChar> {
        MultChar::new(TameChar::trivial(p), z)
    }

    pub fn trivial(ctx: &PAdicContext) -> MultChar {
        let z = match ctx.regime {
            Regime::Symbolic => Scalar::Symbolic(RatFunc::one()),
            Regime::Numeric => Scalar::Numeric(NumC::ONE),
        };
        MultChar { tame: TameChar::trivial(ctx.p), z }
    }

    pub fn p(&self) -> u64 {
        self.tame.p
    }

    pub fn conductor(&self) -> u32 {
        self.tame.n
    }

    pub fn is_unramified(&self) -> bool {
        self.tame.n == 0
    }

    pub fn z_as<C: Coeff>(&self) -> Result<C> {
        C::from_scalar(self.p(), &self.z)
    }

    pub fn inverse(&self) -> Result<MultChar> {
        let z = match &self.z {
            Scalar::Symbolic(f) => Scalar::Symbolic(f.inv()?),
            Scalar::Numeric(c) => Scalar::Numeric(NumC::ONE / *c),
        };
        Ok(MultChar { tame: self.tame.inverse(), z })
    }

    /// `x -> chi(x^k)`.
    pub fn compose_power(&self, k: i64) -> MultChar {
        let z = match &self.z {
            Scalar::Symbolic(f) => Scalar::Symbolic(f.pow(k)),
            Scalar::Numeric(c) => Scalar::Numeric(c.powi(k)),
        };
        MultChar { tame: self.tame.power(k), z }
    }

    /// Value on a coset, as an element of a coefficient field.
    pub fn value_on<C: Field>(&self, x: &UnitCoset) -> Result<C> {
        if self.tame.n > 0 && x.n < self.tame.n {
            return Err(PtwError::InsufficientPrecision(format!("coset level {} below conductor {}", x.n, self.tame.n)));
        }
        let z: C = self.z_as()?;
        Ok(field_pow(&z, x.v)?.mul(&self.tame.value::<C>(x.u)?))
    }

    pub fn to_json(&self) -> MultCharJson {
        MultCharJson { p: self.p(), n: self.tame.n, tame: self.tame.generator_indices(), z: self.z.clone() }
    }

    pub fn from_json(j: &MultCharJson) -> Result<MultChar> {
        let tame = if j.n == 0 { TameChar::trivial(j.p) } else { TameChar::new(j.p, j.n, &j.tame)? };
        MultChar::new(tame, j.z.clone())
    }
}

/// `x^e` for an integer `e`, inverting when negative.
pub fn field_pow<C: Field>(x: &C, e: i64) -> Result<C> {
    let mut acc = C::one();
    let base = if e < 0 { x.inv()? } else { x.clone() };
    for _ in 0..e.unsigned_abs() {
        acc = acc.mul(&base);
    }
    Ok(acc)
}

/// `chi(x) = z^v(x) * tame(unit part)`.
pub fn char_eval(chi: &MultChar, x: &UnitCoset) -> Result<Scalar> {
    match &chi.z {
        Scalar::Symbolic(_) => {
            let v: RatFunc = chi.value_on(x)?;
            Ok(Scalar::Symbolic(v))
        }
        Scalar::Numeric(_) => Ok(Scalar::Numeric(chi.value_on::<NumC>(x)?)),
    }
}

/// `L(chi, s)` in the variable `u = q^{-s}`: `1/(1 - z u)` when unramified, else 1.
pub fn l_factor(chi: &MultChar) -> Result<RatFunc> {
    if !chi.is_unramified() {
        return Ok(RatFunc::one());
    }
    let z = chi.z.as_ratfunc()?;
    RatFunc::one().div(&RatFunc::one().sub(&z.mul(&RatFunc::u())))
}

/// `L(chi, s)` at a given value of `q^{-s}`.
pub fn l_value<C: Field>(chi: &MultChar, qs: &C) -> Result<C> {
    if !chi.is_unramified() {
        return Ok(C::one());
    }
    let z: C = chi.z_as()?;
    let d = C::one().sub(&z.mul(qs));
    if d.near_zero() {
        return Err(PtwError::PoleHit);
    }
    d.inv()
}

/// `sum_{u mod p^n, unit} chi(u) psi(sign * u * twist / p^n)`.
pub fn gauss_sum_generic<C: Coeff>(tame: &TameChar, sign: i32, twist: &Rat) -> Result<C> {
    let n = tame.conductor();
    let p = tame.p();
    let m = pz(p, n);
    let mut acc = C::zero();
    for u in (1..m).filter(|u| u % p != 0) {
        let arg = Rat::from_integer(BigInt::from(u)) * twist / Rat::from_integer(BigInt::from(m)) * rat(sign as i64, 1);
        acc = acc.add(&tame.value::<C>(u)?.mul(&C::psi(p, &arg)?));
    }
    Ok(acc)
}

pub fn gauss_sum(chi: &MultChar, psi_sign: i32, twist: &Rat) -> Result<NumC> {
    if chi.z.is_symbolic() {
        return Err(PtwError::SymbolicRegime);
    }
    if chi.is_unramified() {
        return Err(PtwError::Invalid("Gauss sums need a ramified character".into()));
    }
    gauss_sum_generic::<NumC>(&chi.tame, psi_sign, twist)
}

/// `gamma(chi, s, psi^sign)` with `qs = q^{-s}`, in any coefficient field.
///
/// Unramified: `(1 - y)/(1 - 1/(q y))`, `y = chi(p) q^{-s}`.
/// Conductor `n`: `(chi(p) q^{-s})^n * G(chi_t^{-1}, psi^sign)`.
pub fn gamma_value<C: Field>(chi: &MultChar, qs: &C, sign: i32) -> Result<C> {
    let p = chi.p();
    let z: C = chi.z_as()?;
    let y = z.mul(qs);
    if chi.is_unramified() {
        let d = C::one().sub(&C::q_pow(p, -1).mul(&y.inv()?));
        if d.near_zero() {
            return Err(PtwError::PoleHit);
        }
        return C::one().sub(&y).div(&d);
    }
    let n = chi.conductor() as i64;
    let g: C = gauss_sum_generic(&chi.tame.inverse(), sign, &Rat::one())?;
    Ok(field_pow(&y, n)?.mul(&g))
}

/// The gamma factor together with its L- and epsilon-factor decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaFactor {
    pub value: Scalar,
    /// `L(chi^{-1}, 1 - s)`
    pub l_num: Scalar,
    /// `L(chi, s)`
    pub l_den: Scalar,
    pub eps: Scalar,
}

pub fn gamma_factor(chi: &MultChar, qs: &Scalar, psi_sign: i32) -> Result<GammaFactor> {
    let p = chi.p();
    match (&chi.z, qs) {
        (Scalar::Symbolic(_), Scalar::Symbolic(u)) => {
            if !chi.is_unramified() {
                return Err(PtwError::SymbolicRamified);
            }
            let inv = chi.inverse()?;
            let dual_qs = RatFunc::q_pow(-1).div(u)?;
            let value = gamma_value::<RatFunc>(chi, u, psi_sign)?;
            let l_num = l_value::<RatFunc>(&inv, &dual_qs)?;
            let l_den = l_value::<RatFunc>(chi, u)?;
            Ok(GammaFactor { value: Scalar::Symbolic(value), l_num: Scalar::Symbolic(l_num), l_den: Scalar::Symbolic(l_den), eps: Scalar::Symbolic(RatFunc::one()) })
        }
        (Scalar::Numeric(_), Scalar::Numeric(u)) | (Scalar::Symbolic(_), Scalar::Numeric(u)) => {
            let chi_n = MultChar { tame: chi.tame.clone(), z: Scalar::Numeric(chi.z_as::<NumC>()?) };
            let inv = chi_n.inverse()?;
            let dual_qs = NumC::q_pow(p, -1) / *u;
            let value = gamma_value::<NumC>(&chi_n, u, psi_sign)?;
            let l_num = l_value::<NumC>(&inv, &dual_qs)?;
            let l_den = l_value::<NumC>(&chi_n, u)?;
            let eps = if chi.is_unramified() { NumC::ONE } else { value };
            Ok(GammaFactor { value: Scalar::Numeric(value), l_num: Scalar::Numeric(l_num), l_den: Scalar::Numeric(l_den), eps: Scalar::Numeric(eps) })
        }
        _ => Err(PtwError::RegimeMismatch),
    }
}

/// Unit residues mod `p^n`.
pub fn units_mod(p: u64, n: u32) -> impl Iterator<Item = u64> {
    let m = pz(p, n);
    (1..m.max(2)).filter(move |u| u % p != 0 || m == 1)
}

/// Inverse of a unit mod `p^n`.
pub fn unit_inverse(p: u64, u: u64, n: u32) -> u64 {
    if n == 0 {
        return 1;
    }
    modinv_u64(u, pz(p, n)).expect("unit")
}
