//! Sparse multivariate polynomials over ℚ in the fixed indeterminates `q, z, u, w`.
//!
//! Terms are kept strictly decreasing in graded-lexicographic order with
//! nonzero coefficients, so structural equality is mathematical equality.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num::{BigInt, One, Signed, Zero};

use super::Rat;

pub const NVARS: usize = 4;

/// The indeterminates available to every rational function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Var {
    Q,
    Z,
    U,
    W,
}

impl Var {
    pub const ALL: [Var; NVARS] = [Var::Q, Var::Z, Var::U, Var::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Q => "q",
            Var::Z => "z",
            Var::U => "u",
            Var::W => "w",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        match s {
            "q" => Some(Var::Q),
            "z" => Some(Var::Z),
            "u" => Some(Var::U),
            "w" => Some(Var::W),
            _ => None,
        }
    }
}

pub type Mono = [u32; NVARS];

fn mono_deg(m: &Mono) -> u32 {
    m.iter().sum()
}

/// Graded lexicographic comparison with q > z > u > w.
pub fn grlex(a: &Mono, b: &Mono) -> Ordering {
    mono_deg(a).cmp(&mono_deg(b)).then_with(|| a.cmp(b))
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut r = [0; NVARS];
    for i in 0..NVARS {
        r[i] = a[i] + b[i];
    }
    r
}

fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut r = [0; NVARS];
    for i in 0..NVARS {
        if a[i] < b[i] {
            return None;
        }
        r[i] = a[i] - b[i];
    }
    Some(r)
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, Rat)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![([0; NVARS], c)] }
        }
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(Rat::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Var) -> Self {
        let mut m = [0; NVARS];
        m[v.index()] = 1;
        Poly { terms: vec![(m, Rat::one())] }
    }

    pub fn monomial(c: Rat, m: Mono) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms<I: IntoIterator<Item = (Mono, Rat)>>(it: I) -> Self {
        let mut acc: HashMap<Mono, Rat> = HashMap::new();
        for (m, c) in it {
            if c.is_zero() {
                continue;
            }
            let e = acc.entry(m).or_insert_with(Rat::zero);
            *e += c;
        }
        let mut terms: Vec<(Mono, Rat)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| grlex(&b.0, &a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, Rat)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == [0; NVARS] && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == [0; NVARS])
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<&(Mono, Rat)> {
        self.terms.first()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.iter().map(|(m, _)| m[v.index()]).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, v: Var) -> u32 {
        self.terms.iter().map(|(m, _)| m[v.index()]).min().unwrap_or(0)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| m[v.index()] > 0)
    }

    pub fn vars(&self) -> Vec<Var> {
        Var::ALL.iter().copied().filter(|v| self.contains(*v)).collect()
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect() }
    }

    pub fn mul_mono(&self, mono: &Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, a)| (mono_mul(m, mono), a.clone())).collect() }
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, -a)).collect() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match grlex(ma, mb) {
                Ordering::Greater => {
                    out.push((*ma, ca.clone()));
                    i += 1;
                }
                Ordering::Less => {
                    out.push((*mb, cb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        out.push((*ma, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return Poly { terms: self.terms.iter().map(|(a, x)| (mono_mul(a, m), x * c)).collect() };
        }
        if self.terms.len() == 1 {
            return other.mul(self);
        }
        let mut acc: HashMap<Mono, Rat> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e = acc.entry(mono_mul(ma, mb)).or_insert_with(Rat::zero);
                *e += ca * cb;
            }
        }
        let mut terms: Vec<(Mono, Rat)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| grlex(&b.0, &a.0));
        Poly { terms }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one();
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Rescales so that the grlex-leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.terms.first() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&(Rat::one() / c)),
        }
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if d.is_constant() {
            return Some(self.scale(&(Rat::one() / &d.terms[0].1)));
        }
        if d.terms.len() == 1 {
            let (md, cd) = &d.terms[0];
            let inv = Rat::one() / cd;
            let mut out = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                out.push((mono_div(m, md)?, c * &inv));
            }
            return Some(Poly { terms: out });
        }
        let (ld, lc) = d.terms[0].clone();
        let mut r = self.clone();
        let mut qterms: Vec<(Mono, Rat)> = Vec::new();
        while let Some((lm, lcr)) = r.terms.first().cloned() {
            let m = mono_div(&lm, &ld)?;
            let c = lcr / &lc;
            r = r.sub(&d.mul(&Poly::monomial(c.clone(), m)));
            qterms.push((m, c));
        }
        Some(Poly::from_terms(qterms))
    }

    /// Coefficients with respect to `v`: index i holds the coefficient of v^i.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Mono, Rat)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let mut mm = *m;
            let k = mm[v.index()] as usize;
            mm[v.index()] = 0;
            buckets[k].push((mm, c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coeffs_in(v: Var, cs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (k, c) in cs.iter().enumerate() {
            for (m, a) in &c.terms {
                let mut mm = *m;
                mm[v.index()] += k as u32;
                terms.push((mm, a.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    pub fn leading_coeff_in(&self, v: Var) -> Poly {
        let d = self.degree_in(v);
        let idx = v.index();
        Poly::from_terms(self.terms.iter().filter(|(m, _)| m[idx] == d).map(|(m, c)| {
            let mut mm = *m;
            mm[idx] = 0;
            (mm, c.clone())
        }))
    }

    /// Gcd of the coefficients with respect to `v` (a polynomial free of `v`).
    pub fn content_in(&self, v: Var) -> Poly {
        let cs = self.coeffs_in(v);
        let mut g = Poly::zero();
        for c in cs.iter().filter(|c| !c.is_zero()) {
            if c.is_constant() {
                return Poly::one();
            }
            g = gcd(&g, c);
            if g.is_one() {
                return g;
            }
        }
        g
    }

    pub fn primitive_part_in(&self, v: Var) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides").integer_primitive()
    }

    /// Rescales to integer coefficients with gcd 1 and positive leading term.
    pub fn integer_primitive(&self) -> Poly {
        use num::Integer;
        if self.is_zero() {
            return Poly::zero();
        }
        let mut l = BigInt::one();
        for (_, c) in &self.terms {
            l = l.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            let n = c.numer() * (&l / c.denom());
            g = g.gcd(&n);
        }
        let mut f = Rat::new(l, g);
        if self.terms[0].1.is_negative() {
            f = -f;
        }
        self.scale(&f)
    }

    /// Smallest exponent of each variable across the terms.
    pub fn min_mono(&self) -> Mono {
        let mut r = [u32::MAX; NVARS];
        for (m, _) in &self.terms {
            for i in 0..NVARS {
                r[i] = r[i].min(m[i]);
            }
        }
        if self.terms.is_empty() {
            [0; NVARS]
        } else {
            r
        }
    }

    /// Substitutes rational values for some variables.
    pub fn substitute(&self, vals: &[(Var, Rat)]) -> Poly {
        if vals.is_empty() {
            return self.clone();
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut mm = *m;
            let mut cc = c.clone();
            for (v, x) in vals {
                let e = mm[v.index()];
                if e > 0 {
                    cc *= num::pow::pow(x.clone(), e as usize);
                    mm[v.index()] = 0;
                }
            }
            terms.push((mm, cc));
        }
        Poly::from_terms(terms)
    }

    /// Substitutes a polynomial for one variable.
    pub fn compose(&self, v: Var, by: &Poly) -> Poly {
        let cs = self.coeffs_in(v);
        let mut acc = Poly::zero();
        for c in cs.iter().rev() {
            acc = acc.mul(by).add(c);
        }
        acc
    }

    pub fn eval_rat(&self, vals: &[Rat; NVARS]) -> Rat {
        let mut s = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..NVARS {
                if m[i] > 0 {
                    t *= num::pow::pow(vals[i].clone(), m[i] as usize);
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_complex(&self, vals: &[num::complex::Complex64; NVARS]) -> num::complex::Complex64 {
        use num::ToPrimitive;
        let mut s = num::complex::Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = num::complex::Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for i in 0..NVARS {
                if m[i] > 0 {
                    t *= vals[i].powu(m[i]);
                }
            }
            s += t;
        }
        s
    }
}

/// Pseudo-remainder of `a` by `b` with respect to `v`.
fn prem(a: &Poly, b: &Poly, v: Var) -> Poly {
    let db = b.degree_in(v);
    let lcb = b.leading_coeff_in(v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lcr = r.leading_coeff_in(v);
        let mut shift = [0; NVARS];
        shift[v.index()] = dr - db;
        r = r.mul(&lcb).sub(&b.mul(&lcr).mul_mono(&shift));
    }
    r
}

/// Greatest common divisor, normalized to leading coefficient 1 (zero if both are zero).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let (ma, mb) = (a.min_mono(), b.min_mono());
    if a.is_monomial() || b.is_monomial() {
        let mut g = [0; NVARS];
        for i in 0..NVARS {
            g[i] = ma[i].min(mb[i]);
        }
        return Poly::monomial(Rat::one(), g);
    }
    if ma.iter().any(|&e| e > 0) || mb.iter().any(|&e| e > 0) {
        let mut g = [0; NVARS];
        for i in 0..NVARS {
            g[i] = ma[i].min(mb[i]);
        }
        let a1 = a.div_exact(&Poly::monomial(Rat::one(), ma)).expect("monomial divides");
        let b1 = b.div_exact(&Poly::monomial(Rat::one(), mb)).expect("monomial divides");
        return gcd(&a1, &b1).mul_mono(&g);
    }
    let mut vars: Vec<Var> = Var::ALL.iter().copied().filter(|v| a.contains(*v) || b.contains(*v)).collect();
    for &v in &vars {
        if !a.contains(v) {
            return gcd_list(a, &b.coeffs_in(v));
        }
        if !b.contains(v) {
            return gcd_list(b, &a.coeffs_in(v));
        }
    }
    if vars.len() == 1 {
        return univariate_gcd(a, b, vars[0]);
    }
    for &v in &vars {
        if image_degree(a, b, v) == Some(0) {
            let mut cs = a.coeffs_in(v);
            cs.extend(b.coeffs_in(v));
            return gcd_list(&Poly::zero(), &cs);
        }
    }
    vars.sort_by_key(|v| a.degree_in(*v).max(b.degree_in(*v)));
    prs_gcd(a, b, vars[0])
}

fn gcd_list(start: &Poly, cs: &[Poly]) -> Poly {
    let mut g = start.monic();
    for c in cs.iter().filter(|c| !c.is_zero()) {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Degree in `v` of the gcd of images under a substitution of the other variables.
/// This bounds the true degree from above whenever the leading coefficients survive.
fn image_degree(a: &Poly, b: &Poly, v: Var) -> Option<u32> {
    const POINTS: [i64; 5] = [3, 7, -5, 11, 13];
    let others: Vec<Var> = Var::ALL.iter().copied().filter(|w| *w != v).collect();
    let (la, lb) = (a.leading_coeff_in(v), b.leading_coeff_in(v));
    for shift in 0..4 {
        let vals: Vec<(Var, Rat)> = others.iter().enumerate().map(|(k, w)| (*w, Rat::from_integer(BigInt::from(POINTS[(k + shift) % 5] + shift as i64)))).collect();
        if la.substitute(&vals).is_zero() || lb.substitute(&vals).is_zero() {
            continue;
        }
        let g = univariate_gcd(&a.substitute(&vals), &b.substitute(&vals), v);
        return Some(g.degree_in(v));
    }
    None
}

fn univariate_gcd(a: &Poly, b: &Poly, v: Var) -> Poly {
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    if r0.degree_in(v) < r1.degree_in(v) {
        std::mem::swap(&mut r0, &mut r1);
    }
    while !r1.is_zero() {
        if r1.is_constant() {
            return Poly::one();
        }
        let r = prem(&r0, &r1, v).integer_primitive();
        r0 = r1;
        r1 = r;
    }
    r0.monic()
}

fn prs_gcd(a: &Poly, b: &Poly, v: Var) -> Poly {
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let g = gcd(&ca, &cb);
    let mut r0 = a.div_exact(&ca).expect("content divides").integer_primitive();
    let mut r1 = b.div_exact(&cb).expect("content divides").integer_primitive();
    if r0.degree_in(v) < r1.degree_in(v) {
        std::mem::swap(&mut r0, &mut r1);
    }
    loop {
        let r = prem(&r0, &r1, v).integer_primitive();
        if r.is_zero() {
            break;
        }
        if !r.contains(v) {
            r1 = Poly::one();
            break;
        }
        r0 = r1;
        r1 = r.primitive_part_in(v);
    }
    let p = if r1.is_one() { r1 } else { r1.primitive_part_in(v) };
    g.mul(&p).monic()
}

fn fmt_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let is_const = *m == [0; NVARS];
            let mut parts: Vec<String> = Vec::new();
            if !a.is_one() || is_const {
                parts.push(fmt_rat(&a));
            }
            for v in Var::ALL {
                let e = m[v.index()];
                match e {
                    0 => {}
                    1 => parts.push(v.name().to_string()),
                    _ => parts.push(format!("{}^{}", v.name(), e)),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}
