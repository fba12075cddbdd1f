//! Exact elements of the cyclotomic fields ℚ(ζ_{p^k}).
//!
//! An element is a combination of powers of a primitive `p^k`-th root of
//! unity, reduced by eliminating every exponent `r + (p-1)p^{k-1}` through
//! the relation `Σ_j ζ^{r + j p^{k-1}} = 0`. The reduced form is unique and
//! `k` is always minimal, so derived equality is field equality.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, ToPrimitive, Zero};

use super::{fmt_rat, frac_mod1, p_pow, rat_to_f64, Coeff, NumC, Rat};
use crate::error::{PtwError, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclo {
    p: u64,
    k: u32,
    terms: BTreeMap<u64, Rat>,
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo { p: 0, k: 0, terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Cyclo::rational(Rat::one())
    }

    pub fn rational(r: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(0, r);
        }
        Cyclo { p: 0, k: 0, terms }
    }

    /// `ζ_{p^k}^a`.
    pub fn root(p: u64, a: u64, k: u32) -> Self {
        let n = p.pow(k);
        let mut terms = BTreeMap::new();
        terms.insert(a % n.max(1), Rat::one());
        Cyclo { p, k, terms }.reduced()
    }

    /// Builds `scale * Σ hist[a] ζ_{p^k}^a` from an integer histogram.
    pub fn from_hist(p: u64, k: u32, hist: &[i64], scale: &Rat) -> Self {
        if scale.is_zero() {
            return Cyclo::zero();
        }
        let n = p.pow(k) as usize;
        assert_eq!(hist.len(), n);
        // Reduce on integers first, then attach the rational scale.
        let mut h: Vec<i64> = hist.to_vec();
        if k > 0 {
            let b = p.pow(k - 1) as usize;
            let top = (p as usize - 1) * b;
            for r in 0..b {
                let c = h[top + r];
                if c != 0 {
                    for j in 0..(p as usize - 1) {
                        h[r + j * b] -= c;
                    }
                    h[top + r] = 0;
                }
            }
        }
        let terms: BTreeMap<u64, Rat> = h.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (i as u64, Rat::from_integer(BigInt::from(*c)) * scale)).collect();
        Cyclo { p, k, terms }.lowered()
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.k == 0
    }

    pub fn to_rat(&self) -> Option<Rat> {
        if self.k == 0 {
            Some(self.terms.get(&0).cloned().unwrap_or_else(Rat::zero))
        } else {
            None
        }
    }

    fn reduced(mut self) -> Self {
        if self.k == 0 {
            self.p = 0;
            self.terms.retain(|i, c| *i == 0 && !c.is_zero());
            return self;
        }
        let p = self.p;
        let b = p.pow(self.k - 1);
        let top = (p - 1) * b;
        let hi: Vec<(u64, Rat)> = self.terms.range(top..).map(|(i, c)| (*i, c.clone())).collect();
        for (i, c) in hi {
            self.terms.remove(&i);
            let r = i - top;
            for j in 0..(p - 1) {
                let e = self.terms.entry(r + j * b).or_insert_with(Rat::zero);
                *e -= &c;
            }
        }
        self.terms.retain(|_, c| !c.is_zero());
        self.lowered()
    }

    fn lowered(mut self) -> Self {
        while self.k > 0 && self.terms.keys().all(|i| i % self.p == 0) {
            let p = self.p;
            self.terms = std::mem::take(&mut self.terms).into_iter().map(|(i, c)| (i / p, c)).collect();
            self.k -= 1;
        }
        if self.k == 0 {
            self.p = 0;
        }
        self
    }

    fn lift_to(&self, p: u64, k: u32) -> BTreeMap<u64, Rat> {
        if self.k == k {
            return self.terms.clone();
        }
        let f = p.pow(k - self.k);
        self.terms.iter().map(|(i, c)| (i * f, c.clone())).collect()
    }

    fn common(&self, o: &Cyclo) -> (u64, u32) {
        let p = if self.p != 0 { self.p } else { o.p };
        if self.p != 0 && o.p != 0 {
            assert_eq!(self.p, o.p, "mixing cyclotomic fields of different primes");
        }
        (p, self.k.max(o.k))
    }

    pub fn add(&self, o: &Cyclo) -> Cyclo {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let (p, k) = self.common(o);
        let mut t = self.lift_to(p, k);
        for (i, c) in o.lift_to(p, k) {
            let e = t.entry(i).or_insert_with(Rat::zero);
            *e += c;
        }
        t.retain(|_, c| !c.is_zero());
        // Sums of reduced forms are reduced; only lowering can change.
        Cyclo { p, k, terms: t }.lowered()
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { p: self.p, k: self.k, terms: self.terms.iter().map(|(i, c)| (*i, -c)).collect() }
    }

    pub fn sub(&self, o: &Cyclo) -> Cyclo {
        self.add(&o.neg())
    }

    pub fn scale(&self, r: &Rat) -> Cyclo {
        if r.is_zero() {
            return Cyclo::zero();
        }
        Cyclo { p: self.p, k: self.k, terms: self.terms.iter().map(|(i, c)| (*i, c * r)).collect() }
    }

    /// Multiplies by `ζ_{p^k}^a`.
    pub fn mul_root(&self, p: u64, a: u64, k: u32) -> Cyclo {
        if self.is_zero() {
            return Cyclo::zero();
        }
        let kk = self.k.max(k);
        let n = p.pow(kk);
        let shift = (a % p.pow(k).max(1)) * p.pow(kk - k);
        let t: BTreeMap<u64, Rat> = self.lift_to(p, kk).into_iter().map(|(i, c)| ((i + shift) % n, c)).collect();
        Cyclo { p, k: kk, terms: t }.reduced()
    }

    pub fn mul(&self, o: &Cyclo) -> Cyclo {
        if self.is_zero() || o.is_zero() {
            return Cyclo::zero();
        }
        if self.k == 0 {
            return o.scale(&self.terms[&0]);
        }
        if o.k == 0 {
            return self.scale(&o.terms[&0]);
        }
        let (p, k) = self.common(o);
        let n = p.pow(k);
        let a = self.lift_to(p, k);
        let b = o.lift_to(p, k);
        let mut t: BTreeMap<u64, Rat> = BTreeMap::new();
        for (i, x) in &a {
            for (j, y) in &b {
                let e = t.entry((i + j) % n).or_insert_with(Rat::zero);
                *e += x * y;
            }
        }
        t.retain(|_, c| !c.is_zero());
        Cyclo { p, k, terms: t }.reduced()
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Cyclo {
        if self.k == 0 {
            return self.clone();
        }
        let n = self.p.pow(self.k);
        let t = self.terms.iter().map(|(i, c)| ((n - i) % n, c.clone())).collect();
        Cyclo { p: self.p, k: self.k, terms: t }.reduced()
    }

    pub fn to_complex(&self) -> NumC {
        if self.k == 0 {
            return NumC::real(self.to_rat().map(|r| rat_to_f64(&r)).unwrap_or(0.0));
        }
        let n = self.p.pow(self.k) as f64;
        let mut s = NumC::ZERO;
        for (i, c) in &self.terms {
            let th = 2.0 * std::f64::consts::PI * (*i as f64) / n;
            s += NumC::cis(th) * NumC::real(rat_to_f64(c));
        }
        s
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rat() {
            return write!(f, "{}", fmt_rat(&r));
        }
        let n = self.p.pow(self.k);
        let parts: Vec<String> = self.terms.iter().map(|(i, c)| format!("{}*e({}/{})", fmt_rat(c), i, n)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Coeff for Cyclo {
    fn zero() -> Self {
        Cyclo::zero()
    }
    fn one() -> Self {
        Cyclo::one()
    }
    fn is_zero(&self) -> bool {
        Cyclo::is_zero(self)
    }
    fn from_rat(r: &Rat) -> Self {
        Cyclo::rational(r.clone())
    }
    fn add(&self, o: &Self) -> Self {
        Cyclo::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Cyclo::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Cyclo::mul(self, o)
    }
    fn neg(&self) -> Self {
        Cyclo::neg(self)
    }
    fn scale(&self, r: &Rat) -> Self {
        Cyclo::scale(self, r)
    }
    fn q_pow(p: u64, e: i64) -> Self {
        Cyclo::rational(p_pow(p, e))
    }
    fn cis(p: u64, x: &Rat) -> Result<Self> {
        let f = frac_mod1(x);
        if f.is_zero() {
            return Ok(Cyclo::one());
        }
        let d = f.denom();
        let mut k = 0u32;
        let mut t = d.clone();
        let pb = BigInt::from(p);
        while t > BigInt::one() {
            if !(&t % &pb).is_zero() {
                return Err(PtwError::Invalid(format!("root of unity of order {d} outside Q(zeta_{{p^k}})")));
            }
            t /= &pb;
            k += 1;
        }
        let a = f.numer().to_u64().ok_or_else(|| PtwError::InsufficientPrecision("root of unity index".into()))?;
        Ok(Cyclo::root(p, a, k))
    }
    fn to_numc(&self, _p: u64) -> Result<NumC> {
        Ok(self.to_complex())
    }
    fn from_scalar(_p: u64, s: &super::Scalar) -> Result<Self> {
        match s {
            super::Scalar::Symbolic(f) => f.constant_value().map(Cyclo::rational).ok_or(PtwError::RegimeMismatch),
            super::Scalar::Numeric(_) => Err(PtwError::RegimeMismatch),
        }
    }
}

/// `Σ_r c_r zeta^r` for `zeta = exp(2 pi i / p^j)`, reduced modulo the cyclotomic
/// polynomial. Exact for any coefficient ring; fails unless the sum is rational over it.
pub fn root_sum<C: Coeff>(p: u64, j: u32, coeffs: &[C]) -> Result<C> {
    if j == 0 {
        return Ok(coeffs.iter().fold(C::zero(), |a, c| a.add(c)));
    }
    if !C::SYMBOLIC {
        let n = coeffs.len() as u64;
        let mut acc = C::zero();
        for (r, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&c.mul(&C::cis(p, &Rat::new(BigInt::from(r as u64), BigInt::from(n)))?));
            }
        }
        return Ok(acc);
    }
    let step = p.pow(j - 1) as usize;
    let phi = (p as usize - 1) * step;
    let mut v: Vec<C> = coeffs.to_vec();
    // x^r for r >= phi: x^r = -Σ_{i < p-1} x^{r - phi + i step}.
    for r in (phi..v.len()).rev() {
        let c = std::mem::replace(&mut v[r], C::zero());
        if c.is_zero() {
            continue;
        }
        for i in 0..p as usize - 1 {
            let t = r - phi + i * step;
            v[t] = v[t].sub(&c);
        }
    }
    if v[1..phi].iter().any(|c| !c.is_zero()) {
        return Err(PtwError::SymbolicRootOfUnity);
    }
    Ok(v[0].clone())
}
