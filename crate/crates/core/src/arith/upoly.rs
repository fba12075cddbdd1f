//! Univariate polynomials over a coefficient field, with series division,
//! Taylor shifts and partial fractions at known poles.

use num::{BigInt, One};

use super::{rint, Field, Rat};
use crate::error::{PtwError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct UPoly<F: Field> {
    /// Coefficient of `x^i` at index `i`; no trailing zeros.
    c: Vec<F>,
}

impl<F: Field> UPoly<F> {
    pub fn new(mut c: Vec<F>) -> Self {
        while c.last().map(|x| x.near_zero()).unwrap_or(false) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        UPoly::constant(F::one())
    }

    pub fn constant(a: F) -> Self {
        UPoly::new(vec![a])
    }

    /// `x - a`.
    pub fn linear_root(a: &F) -> Self {
        UPoly::new(vec![a.neg(), F::one()])
    }

    pub fn monomial(a: F, e: usize) -> Self {
        let mut c = vec![F::zero(); e];
        c.push(a);
        UPoly::new(c)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> F {
        self.c.get(i).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn lead(&self) -> F {
        self.c.last().cloned().unwrap_or_else(F::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn scale(&self, a: &F) -> Self {
        UPoly::new(self.c.iter().map(|x| x.mul(a)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut r = vec![F::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                r[i + j] = r[i + j].add(&a.mul(b));
            }
        }
        UPoly::new(r)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = UPoly::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = F::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(a);
        }
        acc
    }

    /// Quotient and remainder.
    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(PtwError::ZeroDenominator)?;
        let lc_inv = d.lead().inv()?;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((UPoly::zero(), self.clone()));
        }
        let mut q = vec![F::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let t = r[i + dd].mul(&lc_inv);
            if !t.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[i + j] = r[i + j].sub(&t.mul(b));
                }
            }
            r[i + dd] = F::zero();
            q[i] = t;
        }
        Ok((UPoly::new(q), UPoly::new(r)))
    }

    /// `p(x + a)`.
    pub fn shift(&self, a: &F) -> Self {
        // Horner in the ring of polynomials.
        let xa = UPoly::new(vec![a.clone(), F::one()]);
        let mut acc = UPoly::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(&xa).add(&UPoly::constant(c.clone()));
        }
        acc
    }

    /// `x^deg p(1/x)`, the reversed coefficient list.
    pub fn reversed(&self, deg: usize) -> Self {
        let mut c: Vec<F> = (0..=deg).map(|i| self.coeff(i)).collect();
        c.reverse();
        UPoly::new(c)
    }

    /// Lowest index with a nonzero coefficient.
    pub fn low_order(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.near_zero())
    }

    /// Divides by `x^k`, dropping the lowest `k` coefficients.
    pub fn shr(&self, k: usize) -> Self {
        UPoly::new(self.c.iter().skip(k).cloned().collect())
    }
}

/// First `n` power-series coefficients of `num/den`, where `den(0) != 0`.
pub fn series_div<F: Field>(num: &UPoly<F>, den: &UPoly<F>, n: usize) -> Result<Vec<F>> {
    let d0 = den.coeff(0);
    if d0.near_zero() {
        return Err(PtwError::PoleHit);
    }
    let inv = d0.inv()?;
    let mut out: Vec<F> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = num.coeff(k);
        for j in 1..=k.min(den.c.len().saturating_sub(1)) {
            acc = acc.sub(&den.coeff(j).mul(&out[k - j]));
        }
        out.push(acc.mul(&inv));
    }
    Ok(out)
}

/// Binomial coefficient as a rational.
pub fn binom(n: i64, k: i64) -> Rat {
    if k < 0 || n < k {
        return rint(0);
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rat::from_integer(r)
}

/// A pole of a univariate rational function.
#[derive(Clone, Debug, PartialEq)]
pub struct Pole<F: Field> {
    pub at: F,
    pub order: u32,
}

/// Decomposition `num/den = poly + Σ coef[j] / (x - at)^(j+1)`.
#[derive(Clone, Debug)]
pub struct PartialFractions<F: Field> {
    pub poly: UPoly<F>,
    pub parts: Vec<(Pole<F>, Vec<F>)>,
}

/// Partial fractions of `num/den` given the complete list of poles.
///
/// The poles must account for every root of `den` with multiplicity; this is
/// checked by comparing `den` with `lead(den) · Π (x - a)^m`.
pub fn partial_fractions<F: Field>(num: &UPoly<F>, den: &UPoly<F>, poles: &[Pole<F>]) -> Result<PartialFractions<F>> {
    let mut prod = UPoly::constant(den.lead());
    for p in poles {
        prod = prod.mul(&UPoly::linear_root(&p.at).pow(p.order));
    }
    let diff = prod.sub(den);
    if !diff.c.iter().all(|x| x.near_zero()) {
        return Err(PtwError::UnrecognizedPoleStructure("pole list does not factor the denominator".into()));
    }
    let (q, r) = num.divrem(den)?;
    let mut parts = Vec::new();
    for (i, p) in poles.iter().enumerate() {
        // g = r / (den / (x-a)^m), expanded at x = a.
        let mut rest = UPoly::constant(den.lead());
        for (j, o) in poles.iter().enumerate() {
            if j != i {
                rest = rest.mul(&UPoly::linear_root(&o.at).pow(o.order));
            }
        }
        let m = p.order as usize;
        let tay = series_div(&r.shift(&p.at), &rest.shift(&p.at), m)?;
        // Coefficient of (x-a)^{-(m-k)} is tay[k].
        let mut coefs = vec![F::zero(); m];
        for (k, t) in tay.into_iter().enumerate() {
            coefs[m - 1 - k] = t;
        }
        parts.push((p.clone(), coefs));
    }
    Ok(PartialFractions { poly: q, parts })
}
