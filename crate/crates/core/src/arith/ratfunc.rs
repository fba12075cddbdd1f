//! Multivariate rational functions over ℚ with a canonical form.
//!
//! Canonical form: numerator and denominator share no factor and the
//! denominator has grlex-leading coefficient 1. The zero function is `0/1`.

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{gcd, Mono, Poly, Var, NVARS};
use super::{fmt_rat, parse_rat, rint, Coeff, Field, NumC, Rat};
use crate::error::{PtwError, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc { num: Poly::one(), den: Poly::one() }
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        RatFunc::constant(rint(n))
    }

    pub fn var(v: Var) -> Self {
        RatFunc { num: Poly::var(v), den: Poly::one() }
    }

    pub fn q() -> Self {
        RatFunc::var(Var::Q)
    }
    pub fn z() -> Self {
        RatFunc::var(Var::Z)
    }
    pub fn u() -> Self {
        RatFunc::var(Var::U)
    }
    pub fn w() -> Self {
        RatFunc::var(Var::W)
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    /// Builds `num/den` and normalizes.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(PtwError::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if den.is_constant() {
            let c = den.constant_value().unwrap();
            return RatFunc { num: num.scale(&(Rat::one() / c)), den: Poly::one() };
        }
        let g = gcd(&num, &den);
        let (n, d) = if g.is_one() { (num, den) } else { (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides")) };
        let lc = d.leading().unwrap().1.clone();
        if lc.is_one() {
            RatFunc { num: n, den: d }
        } else {
            let inv = Rat::one() / lc;
            RatFunc { num: n.scale(&inv), den: d.scale(&inv) }
        }
    }

    /// Re-normalizes; idempotent on canonical values.
    pub fn normalize(&self) -> Self {
        Self::normalized(self.num.clone(), self.den.clone())
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        self.num.contains(v) || self.den.contains(v)
    }

    pub fn vars(&self) -> Vec<Var> {
        Var::ALL.iter().copied().filter(|v| self.contains(*v)).collect()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::normalized(self.num.add(&o.num), self.den.clone());
        }
        if o.den.is_one() {
            return Self::normalized(self.num.add(&o.num.mul(&self.den)), self.den.clone());
        }
        if self.den.is_one() {
            return Self::normalized(o.num.add(&self.num.mul(&o.den)), o.den.clone());
        }
        let g = gcd(&self.den, &o.den);
        let da = o.den.div_exact(&g).unwrap();
        let db = self.den.div_exact(&g).unwrap();
        let num = self.num.mul(&da).add(&o.num.mul(&db));
        let den = self.den.mul(&da);
        Self::normalized(num, den)
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc { num: self.num.mul(&o.num), den: Poly::one() };
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lc = den.leading().unwrap().1.clone();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = Rat::one() / lc;
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(PtwError::ZeroDenominator);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> RatFunc {
        if e == 0 {
            return RatFunc::one();
        }
        let base = if e < 0 { self.inv().expect("nonzero base for negative power") } else { self.clone() };
        let e = e.unsigned_abs() as u32;
        RatFunc { num: base.num.pow(e), den: base.den.pow(e) }.fix_lc()
    }

    fn fix_lc(self) -> RatFunc {
        let lc = self.den.leading().unwrap().1.clone();
        if lc.is_one() {
            self
        } else {
            let inv = Rat::one() / lc;
            RatFunc { num: self.num.scale(&inv), den: self.den.scale(&inv) }
        }
    }

    /// `v^e` for a single indeterminate.
    pub fn var_pow(v: Var, e: i64) -> RatFunc {
        let mut m: Mono = [0; NVARS];
        m[v.index()] = e.unsigned_abs() as u32;
        let mono = Poly::monomial(Rat::one(), m);
        if e >= 0 {
            RatFunc { num: mono, den: Poly::one() }
        } else {
            RatFunc { num: Poly::one(), den: mono }
        }
    }

    pub fn q_pow(e: i64) -> RatFunc {
        RatFunc::var_pow(Var::Q, e)
    }

    /// Substitutes rational values; the result may still contain other variables.
    pub fn substitute(&self, vals: &[(Var, Rat)]) -> Result<RatFunc> {
        let d = self.den.substitute(vals);
        if d.is_zero() {
            return Err(PtwError::PoleHit);
        }
        Ok(Self::normalized(self.num.substitute(vals), d))
    }

    /// Substitutes a rational function for one variable.
    pub fn compose(&self, v: Var, by: &RatFunc) -> Result<RatFunc> {
        if !self.contains(v) {
            return Ok(self.clone());
        }
        // Homogenize: p(by) = sum c_i n^i d^(D-i) / d^D.
        let dn = self.num.degree_in(v).max(self.den.degree_in(v));
        let hom = |p: &Poly| -> Poly {
            let cs = p.coeffs_in(v);
            let mut acc = Poly::zero();
            for (i, c) in cs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let t = c.mul(&by.num.pow(i as u32)).mul(&by.den.pow(dn - i as u32));
                acc = acc.add(&t);
            }
            acc
        };
        let n = hom(&self.num);
        let d = hom(&self.den);
        if d.is_zero() {
            return Err(PtwError::PoleHit);
        }
        Ok(Self::normalized(n, d))
    }

    /// Full rational evaluation.
    pub fn eval_rat(&self, vals: &BTreeMap<Var, Rat>) -> Result<Rat> {
        for v in self.vars() {
            if !vals.contains_key(&v) {
                return Err(PtwError::UnboundVariable(v.name().into()));
            }
        }
        let arr = full_vals(vals);
        let d = self.den.eval_rat(&arr);
        if d.is_zero() {
            return Err(PtwError::PoleHit);
        }
        Ok(self.num.eval_rat(&arr) / d)
    }

    pub fn eval_complex(&self, vals: &BTreeMap<Var, NumC>) -> Result<NumC> {
        for v in self.vars() {
            if !vals.contains_key(&v) {
                return Err(PtwError::UnboundVariable(v.name().into()));
            }
        }
        let mut arr = [Complex64::new(0.0, 0.0); NVARS];
        for (v, x) in vals {
            arr[v.index()] = x.c();
        }
        let d = self.den.eval_complex(&arr);
        if d.norm() < 1e-300 {
            return Err(PtwError::PoleHit);
        }
        NumC::from_c(self.num.eval_complex(&arr) / d).checked()
    }

    /// Valuation in `v` (order of vanishing at `v = 0`), for nonzero values.
    pub fn order_in(&self, v: Var) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        self.num.min_degree_in(v) as i64 - self.den.min_degree_in(v) as i64
    }

    pub fn to_json(&self) -> RatFuncJson {
        let vars: Vec<Var> = Var::ALL.to_vec();
        let enc = |p: &Poly| -> Vec<(String, Vec<u32>)> { p.terms().iter().map(|(m, c)| (fmt_rat(c), m.to_vec())).collect() };
        RatFuncJson { num: enc(&self.num), den: enc(&self.den), vars: vars.iter().map(|v| v.name().to_string()).collect() }
    }

    pub fn from_json(j: &RatFuncJson) -> Result<RatFunc> {
        let vars: Vec<Var> = j.vars.iter().map(|s| Var::from_name(s).ok_or_else(|| PtwError::Invalid(format!("unknown variable {s}")))).collect::<Result<_>>()?;
        let dec = |ts: &[(String, Vec<u32>)]| -> Result<Poly> {
            let mut terms = Vec::new();
            for (c, e) in ts {
                if e.len() != vars.len() {
                    return Err(PtwError::Invalid("exponent vector length".into()));
                }
                let mut m: Mono = [0; NVARS];
                for (k, v) in vars.iter().enumerate() {
                    m[v.index()] += e[k];
                }
                terms.push((m, parse_rat(c)?));
            }
            Ok(Poly::from_terms(terms))
        };
        RatFunc::new(dec(&j.num)?, dec(&j.den)?)
    }
}

fn full_vals(vals: &BTreeMap<Var, Rat>) -> [Rat; NVARS] {
    let mut arr: [Rat; NVARS] = std::array::from_fn(|_| Rat::zero());
    for (v, x) in vals {
        arr[v.index()] = x.clone();
    }
    arr
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RatFuncJson {
    pub num: Vec<(String, Vec<u32>)>,
    pub den: Vec<(String, Vec<u32>)>,
    pub vars: Vec<String>,
}

impl Serialize for RatFunc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RatFuncJson::deserialize(d)?;
        RatFunc::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            let wrap = |p: &Poly| if p.terms().len() > 1 { format!("({p})") } else { format!("{p}") };
            write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

impl From<Rat> for RatFunc {
    fn from(r: Rat) -> Self {
        RatFunc::constant(r)
    }
}

impl Coeff for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn from_rat(r: &Rat) -> Self {
        RatFunc::constant(r.clone())
    }
    fn add(&self, o: &Self) -> Self {
        RatFunc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFunc::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFunc::mul(self, o)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn scale(&self, r: &Rat) -> Self {
        RatFunc::scale(self, r)
    }
    fn q_pow(_p: u64, e: i64) -> Self {
        RatFunc::q_pow(e)
    }
    fn cis(_p: u64, x: &Rat) -> Result<Self> {
        let f = super::frac_mod1(x);
        if f.is_zero() {
            Ok(RatFunc::one())
        } else if f == super::rat(1, 2) {
            Ok(RatFunc::int(-1))
        } else {
            Err(PtwError::SymbolicRootOfUnity)
        }
    }
    fn to_numc(&self, p: u64) -> Result<NumC> {
        let mut m = BTreeMap::new();
        m.insert(Var::Q, NumC::real(p as f64));
        for v in self.vars() {
            if v != Var::Q {
                return Err(PtwError::UnboundVariable(v.name().into()));
            }
        }
        self.eval_complex(&m)
    }
    fn from_scalar(_p: u64, s: &super::Scalar) -> Result<Self> {
        RatFunc::from_scalar_impl(s)
    }
    const SYMBOLIC: bool = true;
}

impl RatFunc {
    fn from_scalar_impl(s: &super::Scalar) -> Result<Self> {
        match s {
            super::Scalar::Symbolic(f) => Ok(f.clone()),
            super::Scalar::Numeric(_) => Err(PtwError::RegimeMismatch),
        }
    }
}

impl Field for RatFunc {
    fn inv(&self) -> Result<Self> {
        RatFunc::inv(self)
    }
}

impl std::ops::Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        RatFunc::add(self, o)
    }
}

impl std::ops::Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        RatFunc::sub(self, o)
    }
}

impl std::ops::Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        RatFunc::mul(self, o)
    }
}

impl std::ops::Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::neg(self)
    }
}

impl std::ops::Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        RatFunc::add(&self, &o)
    }
}

impl std::ops::Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, o: RatFunc) -> RatFunc {
        RatFunc::sub(&self, &o)
    }
}

impl std::ops::Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        RatFunc::mul(&self, &o)
    }
}

impl std::ops::Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::neg(&self)
    }
}

/// Shorthand for the common `1 - x` factor.
pub fn one_minus(x: &RatFunc) -> RatFunc {
    RatFunc::one().sub(x)
}
