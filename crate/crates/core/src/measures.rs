//! Schwartz measures on `F^x` and `F`, tail germs at infinity and zero, and the
//! elementary operations on them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::Field;
use crate::arith::{modinv_u64, Coeff, Rat};
use crate::chars::{field_pow, mulmod, MultChar, TameChar};
use crate::error::{PtwError, Result};
use crate::field::{pz, Ball, UnitCoset};

/// Density values of a measure on one shell `p^v Z_p^x`, indexed by unit residue mod `p^level`.
///
/// Entries at non-unit residues are unused and kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellTable<C> {
    pub level: u32,
    pub vals: Vec<C>,
}

impl<C: Coeff> ShellTable<C> {
    pub fn constant(c: C) -> Self {
        ShellTable { level: 0, vals: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(C::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|c| c.is_zero())
    }

    /// Density at a unit residue known modulo `p^k`, `k >= level`.
    pub fn at(&self, p: u64, r: u64) -> C {
        if self.level == 0 {
            return self.vals[0].clone();
        }
        self.vals[(r % pz(p, self.level)) as usize].clone()
    }

    pub fn refine(&self, p: u64, level: u32) -> Self {
        if level <= self.level {
            return self.clone();
        }
        let m = pz(p, level);
        let vals = (0..m).map(|r| if r % p == 0 { C::zero() } else { self.at(p, r) }).collect();
        ShellTable { level, vals }
    }

    /// Coarsest equivalent table.
    pub fn coarsen(&self, p: u64) -> Self {
        let mut t = self.clone();
        while t.level > 0 {
            let lo = t.level - 1;
            let m = pz(p, lo);
            let ok = (0..pz(p, t.level)).filter(|r| r % p != 0).all(|r| t.vals[r as usize] == t.at_level(r % m.max(1), lo));
            if !ok {
                break;
            }
            t = if lo == 0 {
                ShellTable::constant(t.vals[1].clone())
            } else {
                ShellTable { level: lo, vals: (0..m).map(|r| if r % p == 0 { C::zero() } else { t.vals[r as usize].clone() }).collect() }
            };
        }
        t
    }

    // The value at the smallest unit lifting `r mod p^lo`.
    fn at_level(&self, r: u64, lo: u32) -> C {
        if lo == 0 {
            return self.vals[1 % self.vals.len()].clone();
        }
        self.vals[r as usize].clone()
    }

    pub fn zip(&self, o: &Self, p: u64, f: impl Fn(&C, &C) -> C) -> Self {
        let l = self.level.max(o.level);
        let a = self.refine(p, l);
        let b = o.refine(p, l);
        ShellTable { level: l, vals: a.vals.iter().zip(&b.vals).map(|(x, y)| f(x, y)).collect() }
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        ShellTable { level: self.level, vals: self.vals.iter().map(f).collect() }
    }

    /// `∫_{Z_p^x} table(w) d^x w`.
    pub fn mass(&self, p: u64) -> C {
        if self.level == 0 {
            return self.vals[0].mul(&C::one().sub(&C::q_pow(p, -1)));
        }
        let vol = C::q_pow(p, -(self.level as i64));
        let mut acc = C::zero();
        for r in (1..pz(p, self.level)).filter(|r| r % p != 0) {
            acc = acc.add(&self.vals[r as usize]);
        }
        acc.mul(&vol)
    }

    /// `∫_{Z_p^x} table(w) eta^{-1}(w) d^x w`.
    pub fn component(&self, p: u64, eta: &TameChar) -> Result<C> {
        if eta.is_trivial() {
            return Ok(self.mass(p));
        }
        let t = self.refine(p, eta.conductor());
        let inv = eta.inverse();
        let mut acc = C::zero();
        for r in (1..pz(p, t.level)).filter(|r| r % p != 0) {
            if !t.vals[r as usize].is_zero() {
                acc = acc.add(&t.vals[r as usize].mul(&inv.value::<C>(r)?));
            }
        }
        Ok(acc.mul(&C::q_pow(p, -(t.level as i64))))
    }

    /// `tame^{-1}(w)` times a constant.
    pub fn twisted_constant(p: u64, tame: &TameChar, c: &C) -> Result<Self> {
        if tame.is_trivial() {
            return Ok(ShellTable::constant(c.clone()));
        }
        let n = tame.conductor();
        let inv = tame.inverse();
        let mut vals = vec![C::zero(); pz(p, n) as usize];
        for r in (1..pz(p, n)).filter(|r| r % p != 0) {
            vals[r as usize] = c.mul(&inv.value::<C>(r)?);
        }
        Ok(ShellTable { level: n, vals })
    }
}

/// A Schwartz measure `Σ c_i 1_{coset_i} d^x x` on `F^x`, stored as per-shell density tables.
#[derive(Clone, Debug, PartialEq)]
pub struct GmMeasure<C> {
    p: u64,
    shells: BTreeMap<i64, ShellTable<C>>,
}

impl<C: Coeff> GmMeasure<C> {
    pub fn zero(p: u64) -> Self {
        GmMeasure { p, shells: BTreeMap::new() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `c * 1_U d^x x`.
    pub fn coset(p: u64, u: &UnitCoset, c: C) -> Self {
        let mut m = Self::zero(p);
        m.add_coset(u, &c);
        m
    }

    pub fn from_terms(p: u64, terms: &[(UnitCoset, C)]) -> Self {
        let mut m = Self::zero(p);
        for (u, c) in terms {
            m.add_coset(u, c);
        }
        m
    }

    pub fn add_coset(&mut self, u: &UnitCoset, c: &C) {
        let p = self.p;
        let t = if u.n == 0 {
            ShellTable::constant(c.clone())
        } else {
            let mut vals = vec![C::zero(); pz(p, u.n) as usize];
            vals[u.u as usize] = c.clone();
            ShellTable { level: u.n, vals }
        };
        self.add_shell(u.v, &t);
    }

    pub fn add_shell(&mut self, v: i64, t: &ShellTable<C>) {
        let p = self.p;
        let merged = match self.shells.get(&v) {
            Some(old) => old.zip(t, p, |a, b| a.add(b)),
            None => t.clone(),
        };
        let merged = merged.coarsen(p);
        if merged.is_zero() {
            self.shells.remove(&v);
        } else {
            self.shells.insert(v, merged);
        }
    }

    pub fn shells(&self) -> impl Iterator<Item = (&i64, &ShellTable<C>)> {
        self.shells.iter()
    }

    pub fn shell(&self, v: i64) -> ShellTable<C> {
        self.shells.get(&v).cloned().unwrap_or_else(ShellTable::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.shells.keys().next()?, *self.shells.keys().next_back()?))
    }

    /// Canonical disjoint coset decomposition with nonzero coefficients.
    pub fn terms(&self) -> Vec<(UnitCoset, C)> {
        let p = self.p;
        let mut out = Vec::new();
        for (&v, t) in &self.shells {
            if t.level == 0 {
                out.push((UnitCoset::shell(v), t.vals[0].clone()));
                continue;
            }
            for r in (1..pz(p, t.level)).filter(|r| r % p != 0) {
                let c = &t.vals[r as usize];
                if !c.is_zero() {
                    out.push((UnitCoset { v, u: r, n: t.level }, c.clone()));
                }
            }
        }
        out
    }

    /// Density at a coset of level at least the table level.
    pub fn density(&self, u: &UnitCoset) -> C {
        self.shell(u.v).at(self.p, u.u)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.clone();
        for (&v, t) in &o.shells {
            m.add_shell(v, t);
        }
        m
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut m = Self::zero(self.p);
        for (&v, t) in &self.shells {
            m.add_shell(v, &t.map(|x| x.mul(c)));
        }
        m
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&C::one().neg()))
    }

    pub fn mass(&self) -> C {
        let mut acc = C::zero();
        for t in self.shells.values() {
            acc = acc.add(&t.mass(self.p));
        }
        acc
    }

    /// Multiplies the density by `chi(x) |x|^s`, with `qs = q^{-s}`.
    pub fn twist(&self, chi: &MultChar, qs: &C) -> Result<Self>
    where
        C: Field,
    {
        let p = self.p;
        let z: C = chi.z_as()?;
        let zs = z.mul(qs);
        let n = chi.conductor();
        let mut out = Self::zero(p);
        for (&v, t) in &self.shells {
            let f = field_pow(&zs, v)?;
            let t = t.refine(p, n);
            let mut vals = t.vals.clone();
            if n > 0 {
                for r in (1..pz(p, n)).filter(|r| r % p != 0) {
                    vals[r as usize] = vals[r as usize].mul(&chi.tame.value::<C>(r)?);
                }
            }
            out.add_shell(v, &ShellTable { level: t.level, vals }.map(|x| x.mul(&f)));
        }
        Ok(out)
    }

    /// Pushforward along `x -> 1/x`; `d^x x` is inversion invariant.
    pub fn invert_variable(&self) -> Self {
        let p = self.p;
        let mut out = Self::zero(p);
        for (&v, t) in &self.shells {
            let nt = if t.level == 0 {
                t.clone()
            } else {
                let m = pz(p, t.level);
                let mut vals = vec![C::zero(); m as usize];
                for r in (1..m).filter(|r| r % p != 0) {
                    vals[modinv_u64(r, m).unwrap() as usize] = t.vals[r as usize].clone();
                }
                ShellTable { level: t.level, vals }
            };
            out.add_shell(-v, &nt);
        }
        out
    }

    /// Pushforward along `x -> x^k`.
    pub fn pushforward_power(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Err(PtwError::Invalid("power map needs k != 0".into()));
        }
        if k < 0 {
            return self.invert_variable().pushforward_power(-k);
        }
        let p = self.p;
        let e = crate::arith::val_int(p, &BigInt::from(k)) as u32;
        // x -> x^k is a bijection 1 + p^n -> 1 + p^(n+e) once n >= 1 (n >= 2 for p = 2).
        let base = if p == 2 { 2 } else { 1 };
        let kk = k as u64;
        let mut out = Self::zero(p);
        for (&v, t) in &self.shells {
            let n = t.level.max(base);
            let t = t.refine(p, n);
            let lvl = n + e;
            let m = pz(p, lvl);
            let mut vals = vec![C::zero(); m as usize];
            let factor = C::q_pow(p, e as i64);
            for r in (1..pz(p, n)).filter(|r| r % p != 0) {
                let c = &t.vals[r as usize];
                if c.is_zero() {
                    continue;
                }
                let img = powmod(r, kk, m);
                vals[img as usize] = vals[img as usize].add(&c.mul(&factor));
            }
            out.add_shell(v * k, &ShellTable { level: lvl, vals });
        }
        Ok(out)
    }

    /// Restriction to the shells `lo <= v <= hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Self {
        GmMeasure { p: self.p, shells: self.shells.range(lo..=hi).map(|(k, v)| (*k, v.clone())).collect() }
    }

    /// One `coset,coefficient` row per canonical term.
    pub fn to_csv(&self) -> String
    where
        C: fmt::Display,
    {
        let mut s = String::from("coset,coefficient\n");
        for (u, c) in self.terms() {
            s += &format!("{u},{c}\n");
        }
        s
    }
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

#[derive(Serialize, Deserialize)]
struct GmTermJson<C> {
    coset: UnitCoset,
    c: C,
}

#[derive(Serialize, Deserialize)]
struct GmJson<C> {
    p: u64,
    terms: Vec<GmTermJson<C>>,
}

impl<C: Coeff + Serialize> Serialize for GmMeasure<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self.terms().into_iter().map(|(coset, c)| GmTermJson { coset, c }).collect();
        GmJson { p: self.p, terms }.serialize(s)
    }
}

impl<'de, C: Coeff + Deserialize<'de>> Deserialize<'de> for GmMeasure<C> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GmJson::<C>::deserialize(d)?;
        let terms: Vec<(UnitCoset, C)> = j.terms.into_iter().map(|t| (t.coset, t.c)).collect();
        Ok(GmMeasure::from_terms(j.p, &terms))
    }
}

/// One term `coeff * psi(phase * x) * 1_ball(x) dx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaTerm<C> {
    pub ball: Ball,
    #[serde(with = "rat_str")]
    pub phase: Rat,
    pub coeff: C,
}

/// A Schwartz measure on `F`, density against `dx`, as a sum of (phased) ball terms.
///
/// Plain ball indicators have phase zero. Additive Fourier transforms of ball
/// indicators are phased balls, which keeps the transform exact without
/// evaluating `psi` in the symbolic regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaMeasure<C> {
    pub p: u64,
    pub terms: Vec<GaTerm<C>>,
}

impl<C: Coeff> GaMeasure<C> {
    pub fn zero(p: u64) -> Self {
        GaMeasure { p, terms: vec![] }
    }

    pub fn ball(b: Ball, c: C) -> Self {
        GaMeasure { p: b.p(), terms: vec![GaTerm { ball: b, phase: Rat::zero(), coeff: c }] }
    }

    pub fn from_balls(p: u64, terms: &[(Ball, C)]) -> Self {
        GaMeasure { p, terms: terms.iter().map(|(b, c)| GaTerm { ball: b.clone(), phase: Rat::zero(), coeff: c.clone() }).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        GaMeasure { p: self.p, terms }
    }

    pub fn scale(&self, c: &C) -> Self {
        GaMeasure { p: self.p, terms: self.terms.iter().map(|t| GaTerm { coeff: t.coeff.mul(c), ..t.clone() }).collect() }
    }

    pub fn is_plain(&self) -> bool {
        self.terms.iter().all(|t| t.phase.is_zero())
    }

    /// Density at a point.
    pub fn eval(&self, x: &Rat) -> Result<C> {
        let mut acc = C::zero();
        for t in &self.terms {
            if t.ball.contains(x) {
                acc = acc.add(&t.coeff.mul(&C::psi(self.p, &(&t.phase * x))?));
            }
        }
        Ok(acc)
    }

    /// `value at 0`, the germ of the density at the origin.
    pub fn at_zero(&self) -> Result<C> {
        self.eval(&Rat::zero())
    }

    /// Disjoint plain-ball decomposition, merging equal values.
    ///
    /// Phased terms are refined until `psi(phase * x)` is constant; in the
    /// symbolic regime this fails unless every such value is `±1`.
    pub fn canonical(&self) -> Result<BTreeMap<Ball, C>> {
        let p = self.p;
        let mut pieces: Vec<(Ball, C)> = Vec::new();
        for t in &self.terms {
            if t.coeff.is_zero() {
                continue;
            }
            let need = match crate::arith::val_rat(p, &t.phase) {
                Some(v) if v < 0 => -v,
                _ => i64::MIN,
            };
            if t.ball.level() >= need {
                let ph = C::psi(p, &(&t.phase * t.ball.center()))?;
                pieces.push((t.ball.clone(), t.coeff.mul(&ph)));
            } else {
                for b in t.ball.refine(need) {
                    let ph = C::psi(p, &(&t.phase * b.center()))?;
                    pieces.push((b, t.coeff.mul(&ph)));
                }
            }
        }
        Ok(disjointify(pieces))
    }

    /// `∫ density(x) 1_B(x) dx` for a ball `B`.
    pub fn integrate_ball(&self, b: &Ball) -> Result<C> {
        let mut acc = C::zero();
        for t in &self.terms {
            let (small, contained) = if b.contains_ball(&t.ball) {
                (t.ball.clone(), true)
            } else if t.ball.contains_ball(b) {
                (b.clone(), false)
            } else {
                continue;
            };
            let _ = contained;
            acc = acc.add(&t.coeff.mul(&phased_ball_integral::<C>(&small, &t.phase)?));
        }
        Ok(acc)
    }

    /// Total mass.
    pub fn mass(&self) -> Result<C> {
        let mut acc = C::zero();
        for t in &self.terms {
            acc = acc.add(&t.coeff.mul(&phased_ball_integral::<C>(&t.ball, &t.phase)?));
        }
        Ok(acc)
    }
}

/// `∫_B psi(phase * x) dx`.
pub fn phased_ball_integral<C: Coeff>(b: &Ball, phase: &Rat) -> Result<C> {
    let p = b.p();
    let n = b.level();
    // psi(phase x) is a character of p^n Z_p: trivial iff v(phase) >= -n.
    match crate::arith::val_rat(p, phase) {
        Some(v) if v < -n => Ok(C::zero()),
        _ => Ok(C::psi(p, &(phase * b.center()))?.mul(&C::q_pow(p, -n))),
    }
}

/// Disjoint decomposition of a list of weighted balls, merged and coarsened.
pub fn disjointify<C: Coeff>(pieces: Vec<(Ball, C)>) -> BTreeMap<Ball, C> {
    if pieces.is_empty() {
        return BTreeMap::new();
    }
    // Refine every piece to the finest level inside the coarsest ball that contains it.
    let mut roots: Vec<Ball> = Vec::new();
    let mut sorted = pieces.clone();
    sorted.sort_by(|a, b| a.0.level().cmp(&b.0.level()));
    for (b, _) in &sorted {
        if !roots.iter().any(|r| r.contains_ball(b)) {
            roots.push(b.clone());
        }
    }
    let mut out = BTreeMap::new();
    for root in roots {
        let inside: Vec<&(Ball, C)> = pieces.iter().filter(|(b, _)| root.contains_ball(b)).collect();
        out.extend(merge_tree(&root, &inside));
    }
    out.retain(|_, c: &mut C| !c.is_zero());
    out
}

// Values on `root` as a disjoint coarsened map, recursing on the children.
fn merge_tree<C: Coeff>(root: &Ball, pieces: &[&(Ball, C)]) -> BTreeMap<Ball, C> {
    let mut here = C::zero();
    let mut deeper: Vec<&(Ball, C)> = Vec::new();
    for pc in pieces {
        if pc.0 == *root {
            here = here.add(&pc.1);
        } else {
            deeper.push(pc);
        }
    }
    let mut out = BTreeMap::new();
    if deeper.is_empty() {
        out.insert(root.clone(), here);
        return out;
    }
    let mut all_same: Option<C> = None;
    let mut uniform = true;
    let mut parts = Vec::new();
    for ch in root.children() {
        let sub: Vec<&(Ball, C)> = deeper.iter().copied().filter(|(b, _)| ch.contains_ball(b)).collect();
        let mut m = merge_tree(&ch, &sub);
        for v in m.values_mut() {
            *v = v.add(&here);
        }
        if m.len() == 1 && m.contains_key(&ch) {
            let v = m[&ch].clone();
            match &all_same {
                None => all_same = Some(v),
                Some(s) if *s == v => {}
                _ => uniform = false,
            }
        } else {
            uniform = false;
        }
        parts.push(m);
    }
    if uniform {
        out.insert(root.clone(), all_same.unwrap());
        return out;
    }
    for m in parts {
        out.extend(m);
    }
    out
}

/// Additive Fourier transform `f^(xi) = ∫ f(x) psi(sign * x xi) dx`, term by term.
///
/// `c psi(b x) 1_{a + p^n}` goes to `c psi(ab) q^{-n} psi(sign a xi) 1_{-sign b + p^{-n}}`.
pub fn additive_fourier<C: Coeff>(f: &GaMeasure<C>, sign: i32) -> Result<GaMeasure<C>> {
    let p = f.p;
    let s = Rat::from_integer(BigInt::from(sign));
    let mut terms = Vec::with_capacity(f.terms.len());
    for t in &f.terms {
        let a = t.ball.center();
        let n = t.ball.level();
        let c = t.coeff.mul(&C::psi(p, &(a * &t.phase))?).mul(&C::q_pow(p, -n));
        terms.push(GaTerm { ball: Ball::new(p, &(-&s * &t.phase), -n)?, phase: &s * a, coeff: c });
    }
    Ok(GaMeasure { p, terms })
}

/// A tail `coeff * v(zeta)^m * chi^{-1}(zeta) |zeta|^kappa d^x zeta` on `|zeta| >= q^start`.
///
/// `kappa = 1` for the SL2 normalization. For PGL2 (`kappa = 1/2`) the stored
/// unramified parameter is taken to already include the factor `q^{1/2}`, so
/// the shell ratio is `z` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct TailGerm<C> {
    pub tame: TameChar,
    pub z: C,
    pub log_power: u32,
    pub coeff: C,
    pub start: i64,
    pub norm: GermNorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GermNorm {
    SL2,
    PGL2,
}

impl<C: Coeff> TailGerm<C> {
    pub fn new(chi: &MultChar, log_power: u32, coeff: C, start: i64, norm: GermNorm) -> Result<Self> {
        Ok(TailGerm { tame: chi.tame.clone(), z: chi.z_as()?, log_power, coeff, start, norm })
    }

    /// Density on `|zeta| = q^n` is `coeff * (-n)^m * ratio^n * tame^{-1}(unit)`.
    pub fn ratio(&self, p: u64) -> C {
        match self.norm {
            GermNorm::SL2 => self.z.mul(&C::q_pow(p, 1)),
            GermNorm::PGL2 => self.z.clone(),
        }
    }

    pub fn shell(&self, p: u64, v: i64) -> Result<ShellTable<C>>
    where
        C: Field,
    {
        if -v < self.start {
            return Ok(ShellTable::zero());
        }
        let n = -v;
        let c = self.coeff.mul(&C::from_int(v.pow(self.log_power))).mul(&field_pow(&self.ratio(p), n)?);
        ShellTable::twisted_constant(p, &self.tame, &c)
    }
}

/// A germ at zero: density `coeff * v^m * rho^v * tame^{-1}(unit)` on shells `v >= start`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroGerm<C> {
    pub tame: TameChar,
    pub rho: C,
    pub log_power: u32,
    pub coeff: C,
    pub start: i64,
}

impl<C: Coeff> ZeroGerm<C> {
    pub fn shell(&self, p: u64, v: i64) -> Result<ShellTable<C>>
    where
        C: Field,
    {
        if v < self.start {
            return Ok(ShellTable::zero());
        }
        let c = self.coeff.mul(&C::from_int(v.pow(self.log_power))).mul(&field_pow(&self.rho, v)?);
        ShellTable::twisted_constant(p, &self.tame, &c)
    }
}

/// Shell densities near zero that are not geometric germs (e.g. Kloosterman data).
pub trait ShellProvider<C>: Send + Sync + fmt::Debug {
    /// Density table on shell `v`.
    fn shell(&self, v: i64) -> Result<ShellTable<C>>;
}

/// A Schwartz part plus tails at infinity, germs at zero and an optional
/// provider for shells `v >= near_zero_from`.
#[derive(Clone, Debug)]
pub struct ExtendedMeasure<C> {
    pub compact: GmMeasure<C>,
    pub tails: Vec<TailGerm<C>>,
    pub zeros: Vec<ZeroGerm<C>>,
    pub near_zero: Option<(i64, Arc<dyn ShellProvider<C>>)>,
}

impl<C: Coeff + Field> ExtendedMeasure<C> {
    pub fn from_compact(m: GmMeasure<C>) -> Self {
        ExtendedMeasure { compact: m, tails: vec![], zeros: vec![], near_zero: None }
    }

    pub fn zero(p: u64) -> Self {
        Self::from_compact(GmMeasure::zero(p))
    }

    pub fn p(&self) -> u64 {
        self.compact.p()
    }

    pub fn has_provider(&self) -> bool {
        self.near_zero.is_some()
    }

    /// Total density table on shell `v`.
    pub fn shell(&self, v: i64) -> Result<ShellTable<C>> {
        let p = self.p();
        let mut t = self.compact.shell(v);
        for g in &self.tails {
            t = t.zip(&g.shell(p, v)?, p, |a, b| a.add(b));
        }
        for g in &self.zeros {
            t = t.zip(&g.shell(p, v)?, p, |a, b| a.add(b));
        }
        if let Some((from, prov)) = &self.near_zero {
            if v >= *from {
                t = t.zip(&prov.shell(v)?, p, |a, b| a.add(b));
            }
        }
        Ok(t.coarsen(p))
    }

    /// The measure on shells `lo..=hi` as a compact measure.
    pub fn window(&self, lo: i64, hi: i64) -> Result<GmMeasure<C>> {
        let mut m = GmMeasure::zero(self.p());
        for v in lo..=hi {
            m.add_shell(v, &self.shell(v)?);
        }
        Ok(m)
    }

    /// Shells outside which only germs contribute: `(lowest, highest)` valuations of the explicit data.
    pub fn explicit_range(&self) -> (i64, i64) {
        let (mut lo, mut hi) = self.compact.support().unwrap_or((0, 0));
        for g in &self.tails {
            lo = lo.min(-g.start);
        }
        for g in &self.zeros {
            hi = hi.max(g.start);
        }
        if let Some((from, _)) = &self.near_zero {
            hi = hi.max(*from);
        }
        (lo, hi)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.near_zero.is_some() && o.near_zero.is_some() {
            return Err(PtwError::Invalid("cannot add two near-zero providers".into()));
        }
        let mut tails = self.tails.clone();
        tails.extend(o.tails.iter().cloned());
        let mut zeros = self.zeros.clone();
        zeros.extend(o.zeros.iter().cloned());
        Ok(ExtendedMeasure { compact: self.compact.add(&o.compact), tails, zeros, near_zero: self.near_zero.clone().or_else(|| o.near_zero.clone()) }.canonical())
    }

    pub fn scale(&self, c: &C) -> Result<Self> {
        if self.near_zero.is_some() {
            return Err(PtwError::Invalid("cannot rescale a near-zero provider".into()));
        }
        Ok(ExtendedMeasure {
            compact: self.compact.scale(c),
            tails: self.tails.iter().map(|g| TailGerm { coeff: g.coeff.mul(c), ..g.clone() }).collect(),
            zeros: self.zeros.iter().map(|g| ZeroGerm { coeff: g.coeff.mul(c), ..g.clone() }).collect(),
            near_zero: None,
        })
    }

    /// Merges germs with equal shape, folding start mismatches into the compact part.
    pub fn canonical(&self) -> Self {
        let p = self.p();
        let mut compact = self.compact.clone();
        let mut tails: Vec<TailGerm<C>> = Vec::new();
        for g in &self.tails {
            match tails.iter_mut().find(|h| h.tame == g.tame && h.ratio(p) == g.ratio(p) && h.log_power == g.log_power) {
                Some(h) => {
                    let s = h.start.max(g.start);
                    for (x, lo) in [(h.clone(), h.start), (g.clone(), g.start)] {
                        for n in lo..s {
                            if let Ok(t) = x.shell(p, -n) {
                                compact.add_shell(-n, &t);
                            }
                        }
                    }
                    h.start = s;
                    h.coeff = h.coeff.add(&g.coeff);
                }
                None => tails.push(g.clone()),
            }
        }
        tails.retain(|g| !g.coeff.is_zero());
        let mut zeros: Vec<ZeroGerm<C>> = Vec::new();
        for g in &self.zeros {
            match zeros.iter_mut().find(|h| h.tame == g.tame && h.rho == g.rho && h.log_power == g.log_power) {
                Some(h) => {
                    let s = h.start.max(g.start);
                    for (x, lo) in [(h.clone(), h.start), (g.clone(), g.start)] {
                        for v in lo..s {
                            if let Ok(t) = x.shell(p, v) {
                                compact.add_shell(v, &t);
                            }
                        }
                    }
                    h.start = s;
                    h.coeff = h.coeff.add(&g.coeff);
                }
                None => zeros.push(g.clone()),
            }
        }
        zeros.retain(|g| !g.coeff.is_zero());
        ExtendedMeasure { compact, tails, zeros, near_zero: self.near_zero.clone() }
    }

    /// Multiplies by `chi(x) |x|^s`; a tail with character `chi_1` acquires the character
    /// `chi_1 chi^{-1} |.|^{-s}`, a zero germ's ratio is multiplied by `chi(p) q^{-s}`.
    pub fn twist(&self, chi: &MultChar, qs: &C) -> Result<Self> {
        if self.near_zero.is_some() {
            return Err(PtwError::Invalid("cannot twist a near-zero provider".into()));
        }
        let z: C = chi.z_as()?;
        let zs = z.mul(qs);
        let tame_inv = chi.tame.inverse();
        let tails = self.tails.iter().map(|g| Ok(TailGerm { tame: g.tame.mul(&tame_inv), z: g.z.div(&zs)?, ..g.clone() })).collect::<Result<Vec<_>>>()?;
        let zeros = self.zeros.iter().map(|g| ZeroGerm { tame: g.tame.mul(&tame_inv), rho: g.rho.mul(&zs), ..g.clone() }).collect();
        Ok(ExtendedMeasure { compact: self.compact.twist(chi, qs)?, tails, zeros, near_zero: None })
    }
}

mod rat_str {
    use super::Rat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::arith::fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        crate::arith::parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TailJson<C> {
    p: u64,
    tame: Vec<u64>,
    n: u32,
    z: C,
    log_power: u32,
    coeff: C,
    start: i64,
    norm: GermNorm,
}

#[derive(Serialize, Deserialize)]
struct ZeroJson<C> {
    p: u64,
    tame: Vec<u64>,
    n: u32,
    rho: C,
    log_power: u32,
    coeff: C,
    start: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "C: Coeff + Serialize", deserialize = "C: Coeff + Deserialize<'de>"))]
struct ExtJson<C> {
    compact: GmMeasure<C>,
    tails: Vec<TailJson<C>>,
    zeros: Vec<ZeroJson<C>>,
}

fn tame_from(p: u64, n: u32, idx: &[u64]) -> Result<TameChar> {
    if n == 0 {
        Ok(TameChar::trivial(p))
    } else {
        TameChar::new(p, n, idx)
    }
}

impl<C: Coeff + Field + Serialize> Serialize for TailGerm<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TailJson {
            p: self.tame.p(),
            tame: self.tame.generator_indices(),
            n: self.tame.conductor(),
            z: self.z.clone(),
            log_power: self.log_power,
            coeff: self.coeff.clone(),
            start: self.start,
            norm: self.norm,
        }
        .serialize(s)
    }
}

impl<C: Coeff + Field + Serialize> Serialize for ExtendedMeasure<C> {
    /// Providers are not serializable; only the finite data is written.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExtJson {
            compact: self.compact.clone(),
            tails: self
                .tails
                .iter()
                .map(|g| TailJson {
                    p: g.tame.p(),
                    tame: g.tame.generator_indices(),
                    n: g.tame.conductor(),
                    z: g.z.clone(),
                    log_power: g.log_power,
                    coeff: g.coeff.clone(),
                    start: g.start,
                    norm: g.norm,
                })
                .collect(),
            zeros: self
                .zeros
                .iter()
                .map(|g| ZeroJson {
                    p: g.tame.p(),
                    tame: g.tame.generator_indices(),
                    n: g.tame.conductor(),
                    rho: g.rho.clone(),
                    log_power: g.log_power,
                    coeff: g.coeff.clone(),
                    start: g.start,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, C: Coeff + Field + Deserialize<'de>> Deserialize<'de> for ExtendedMeasure<C> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let j = ExtJson::<C>::deserialize(d)?;
        let tails = j
            .tails
            .into_iter()
            .map(|t| Ok(TailGerm { tame: tame_from(t.p, t.n, &t.tame)?, z: t.z, log_power: t.log_power, coeff: t.coeff, start: t.start, norm: t.norm }))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let zeros = j
            .zeros
            .into_iter()
            .map(|t| Ok(ZeroGerm { tame: tame_from(t.p, t.n, &t.tame)?, rho: t.rho, log_power: t.log_power, coeff: t.coeff, start: t.start }))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Ok(ExtendedMeasure { compact: j.compact, tails, zeros, near_zero: None })
    }
}

impl<C: Coeff + Field> PartialEq for ExtendedMeasure<C> {
    fn eq(&self, o: &Self) -> bool {
        let a = self.canonical();
        let b = o.canonical();
        a.near_zero.is_none() && b.near_zero.is_none() && a.compact == b.compact && a.tails == b.tails && a.zeros == b.zeros
    }
}
