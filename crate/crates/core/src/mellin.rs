//! Mellin transforms on `F^x`, their inversion through partial fractions, and
//! Tate zeta integrals with the local functional equation.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::{BigInt, Signed, Zero};
use serde::Serialize;

use crate::arith::upoly::{binom, partial_fractions, Pole};
use crate::arith::{rint, val_rat, Coeff, Field, NumC, Rat, RatFunc, UPoly, Var};
use crate::chars::{field_pow, gamma_value, MultChar, TameChar};
use crate::error::{PtwError, Result};
use crate::field::{pz, Ball};
use crate::measures::{ExtendedMeasure, GaMeasure, GermNorm, GmMeasure, ShellTable, TailGerm, ZeroGerm};

/// Coefficient fields in which poles can be located relative to the unit circle.
pub trait PoleField: Field {
    /// Compares `|self|` with 1.
    fn cmp_unit(&self) -> Result<Ordering>;
    /// All solutions of `x^k = self`, `k >= 1`.
    fn kth_roots(&self, k: u32) -> Result<Vec<Self>>;
}

impl PoleField for NumC {
    fn cmp_unit(&self) -> Result<Ordering> {
        let a = self.abs();
        if (a - 1.0).abs() < 1e-12 {
            return Err(PtwError::UnrecognizedPoleStructure(format!("pole {self} on the unit circle")));
        }
        Ok(if a < 1.0 { Ordering::Less } else { Ordering::Greater })
    }

    fn kth_roots(&self, k: u32) -> Result<Vec<Self>> {
        let c = self.c();
        let r = c.norm().powf(1.0 / k as f64);
        let th = c.arg();
        Ok((0..k)
            .map(|j| {
                let a = (th + 2.0 * std::f64::consts::PI * j as f64) / k as f64;
                NumC::new(r * a.cos(), r * a.sin())
            })
            .collect())
    }
}

/// Symbolic poles are sized asymptotically: `u`, then `w`, taken small; then `q` taken large;
/// a remaining rational constant is compared with 1.
impl PoleField for RatFunc {
    fn cmp_unit(&self) -> Result<Ordering> {
        let bad = || PtwError::UnrecognizedPoleStructure(format!("cannot place pole {self} against |z| = 1"));
        if self.contains(Var::Z) || self.is_zero() {
            return Err(bad());
        }
        let mut a = self.clone();
        for v in [Var::U, Var::W] {
            let o = a.order_in(v);
            if o > 0 {
                return Ok(Ordering::Less);
            }
            if o < 0 {
                return Ok(Ordering::Greater);
            }
            a = a.substitute(&[(v, rint(0))])?;
        }
        let dn = a.numer().degree_in(Var::Q) as i64;
        let dd = a.denom().degree_in(Var::Q) as i64;
        match (dn - dd).cmp(&0) {
            Ordering::Greater => return Ok(Ordering::Greater),
            Ordering::Less => return Ok(Ordering::Less),
            Ordering::Equal => {}
        }
        let ln = a.numer().leading_coeff_in(Var::Q).constant_value().ok_or_else(bad)?;
        let ld = a.denom().leading_coeff_in(Var::Q).constant_value().ok_or_else(bad)?;
        let c = (ln / ld).abs();
        match c.cmp(&rint(1)) {
            Ordering::Equal => Err(bad()),
            o => Ok(o),
        }
    }

    fn kth_roots(&self, k: u32) -> Result<Vec<Self>> {
        if k == 1 {
            Ok(vec![self.clone()])
        } else {
            Err(PtwError::Invalid(format!("symbolic roots of degree {k} are not supported")))
        }
    }
}

/// A rational function of `z`: `z^low * num(z) / Π (z - a)^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZRat<C: Field> {
    pub low: i64,
    pub num: UPoly<C>,
    pub poles: Vec<Pole<C>>,
}

fn same<C: Field>(a: &C, b: &C) -> bool {
    a.sub(b).near_zero()
}

fn shift_up<C: Field>(p: &UPoly<C>, k: usize) -> UPoly<C> {
    p.mul(&UPoly::monomial(C::one(), k))
}

impl<C: Field> ZRat<C> {
    pub fn zero() -> Self {
        ZRat { low: 0, num: UPoly::zero(), poles: vec![] }
    }

    pub fn constant(c: C) -> Self {
        ZRat { low: 0, num: UPoly::constant(c), poles: vec![] }
    }

    pub fn monomial(c: C, e: i64) -> Self {
        ZRat { low: e, num: UPoly::constant(c), poles: vec![] }
    }

    /// `Σ c_e z^e`.
    pub fn laurent(coeffs: &BTreeMap<i64, C>) -> Self {
        let Some((&lo, _)) = coeffs.iter().next() else {
            return Self::zero();
        };
        let hi = *coeffs.keys().next_back().unwrap();
        let v = (lo..=hi).map(|e| coeffs.get(&e).cloned().unwrap_or_else(C::zero)).collect();
        ZRat { low: lo, num: UPoly::new(v), poles: vec![] }.normalized()
    }

    /// `1/(z - a)^m`.
    pub fn pole(a: C, m: u32) -> Self {
        ZRat { low: 0, num: UPoly::one(), poles: vec![Pole { at: a, order: m }] }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn denominator(&self) -> UPoly<C> {
        let mut d = UPoly::one();
        for p in &self.poles {
            d = d.mul(&UPoly::linear_root(&p.at).pow(p.order));
        }
        d
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        if let Some(k) = self.num.low_order() {
            if k > 0 {
                self.num = self.num.shr(k);
                self.low += k as i64;
            }
        }
        self.poles.retain(|p| p.order > 0);
        self
    }

    /// Cancels poles at zeros of the numerator.
    pub fn simplify(&self) -> Result<Self> {
        let mut out = self.clone().normalized();
        // Poles at the origin are absorbed into the monomial factor.
        if let Some(i) = out.poles.iter().position(|p| p.at.near_zero()) {
            let pz = out.poles.remove(i);
            out.low -= pz.order as i64;
        }
        for i in 0..out.poles.len() {
            while out.poles[i].order > 0 && !out.num.is_zero() && out.num.eval(&out.poles[i].at).near_zero() {
                let (q, _) = out.num.divrem(&UPoly::linear_root(&out.poles[i].at))?;
                out.num = q;
                out.poles[i].order -= 1;
            }
        }
        Ok(out.normalized())
    }

    fn merge_poles(list: Vec<Pole<C>>) -> Vec<Pole<C>> {
        let mut out: Vec<Pole<C>> = Vec::new();
        for p in list {
            match out.iter_mut().find(|o| same(&o.at, &p.at)) {
                Some(o) => o.order += p.order,
                None => out.push(p),
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let mut poles = self.poles.clone();
        poles.extend(o.poles.iter().cloned());
        ZRat { low: self.low + o.low, num: self.num.mul(&o.num), poles: Self::merge_poles(poles) }.simplify()
    }

    pub fn scale(&self, c: &C) -> Self {
        ZRat { num: self.num.scale(c), ..self.clone() }.normalized()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        // Common denominator: the maximal order of each pole.
        let mut poles: Vec<Pole<C>> = self.poles.clone();
        for p in &o.poles {
            match poles.iter_mut().find(|q| same(&q.at, &p.at)) {
                Some(q) => q.order = q.order.max(p.order),
                None => poles.push(p.clone()),
            }
        }
        let lift = |x: &Self| -> UPoly<C> {
            let mut n = x.num.clone();
            for p in &poles {
                let have = x.poles.iter().find(|q| same(&q.at, &p.at)).map(|q| q.order).unwrap_or(0);
                n = n.mul(&UPoly::linear_root(&p.at).pow(p.order - have));
            }
            n
        };
        let low = self.low.min(o.low);
        let a = shift_up(&lift(self), (self.low - low) as usize);
        let b = shift_up(&lift(o), (o.low - low) as usize);
        ZRat { low, num: a.add(&b), poles }.simplify()
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&C::one().neg()))
    }

    pub fn eval(&self, z: &C) -> Result<C> {
        let d = self.denominator().eval(z);
        if d.near_zero() {
            return Err(PtwError::PoleHit);
        }
        Ok(field_pow(z, self.low)?.mul(&self.num.eval(z)).div(&d)?)
    }

    /// Laurent coefficients, when there are no poles.
    pub fn laurent_coeffs(&self) -> Option<BTreeMap<i64, C>> {
        let s = self.simplify().ok()?;
        if !s.poles.is_empty() {
            return None;
        }
        Some(s.num.coeffs().iter().enumerate().filter(|(_, c)| !c.near_zero()).map(|(i, c)| (s.low + i as i64, c.clone())).collect())
    }
}

impl ZRat<RatFunc> {
    /// As a single rational function in `z`.
    pub fn to_ratfunc(&self) -> Result<RatFunc> {
        let z = RatFunc::z();
        let ev = |p: &UPoly<RatFunc>| p.coeffs().iter().rev().fold(RatFunc::zero(), |acc, c| acc.mul(&z).add(c));
        ev(&self.num).mul(&RatFunc::var_pow(Var::Z, self.low)).div(&ev(&self.denominator()))
    }
}

/// Mellin transform `f^(chi) = ∫ f chi^{-1}`, one rational function of `z = chi(p)` per
/// tame component that carries mass.
#[derive(Clone, Debug)]
pub struct MellinData<C: Field> {
    pub p: u64,
    pub comps: Vec<(TameChar, ZRat<C>)>,
}

impl<C: PoleField> MellinData<C> {
    pub fn zero(p: u64) -> Self {
        MellinData { p, comps: vec![] }
    }

    pub fn component(&self, eta: &TameChar) -> ZRat<C> {
        self.comps.iter().find(|(t, _)| t == eta).map(|(_, r)| r.clone()).unwrap_or_else(ZRat::zero)
    }

    pub fn add_component(&mut self, eta: &TameChar, r: &ZRat<C>) -> Result<()> {
        match self.comps.iter_mut().find(|(t, _)| t == eta) {
            Some((_, old)) => *old = old.add(r)?,
            None => self.comps.push((eta.clone(), r.clone())),
        }
        self.comps.retain(|(_, r)| !r.is_zero());
        Ok(())
    }

    /// Multiplies each component by a multiplier depending on the component.
    pub fn map(&self, f: impl Fn(&TameChar, &ZRat<C>) -> Result<ZRat<C>>) -> Result<Self> {
        let mut out = MellinData::zero(self.p);
        for (t, r) in &self.comps {
            out.add_component(t, &f(t, r)?)?;
        }
        Ok(out)
    }

    pub fn is_laurent(&self) -> bool {
        self.comps.iter().all(|(_, r)| r.laurent_coeffs().is_some())
    }

    /// Value at the character `eta * |.|`-free parameter `z`.
    pub fn eval(&self, eta: &TameChar, z: &C) -> Result<C> {
        self.component(eta).eval(z)
    }
}

#[derive(Serialize)]
struct PoleJson {
    z: RatFunc,
    order: u32,
}

#[derive(Serialize)]
struct CompJson {
    tame: (u32, Vec<u64>),
    ratfunc: RatFunc,
    poles: Vec<PoleJson>,
}

#[derive(Serialize)]
struct MellinJson {
    components: Vec<CompJson>,
}

impl MellinData<RatFunc> {
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mut components = Vec::new();
        for (t, r) in &self.comps {
            let r = r.simplify()?;
            components.push(CompJson {
                tame: (t.conductor(), t.generator_indices()),
                ratfunc: r.to_ratfunc()?,
                poles: r.poles.iter().map(|p| PoleJson { z: p.at.clone(), order: p.order }).collect(),
            });
        }
        serde_json::to_value(MellinJson { components }).map_err(|e| PtwError::Invalid(e.to_string()))
    }
}

/// Characters of `Z_p^x` of conductor at most `n`.
pub fn characters_up_to(p: u64, n: u32) -> Vec<TameChar> {
    (0..=n).flat_map(|c| TameChar::all_of_conductor(p, c)).collect()
}

/// The Mellin components of one shell table placed on shell `v`.
fn shell_components<C: PoleField>(p: u64, v: i64, t: &ShellTable<C>, out: &mut MellinData<C>) -> Result<()> {
    let t = t.coarsen(p);
    for eta in characters_up_to(p, t.level) {
        let c = t.component(p, &eta)?;
        if !c.is_zero() {
            out.add_component(&eta, &ZRat::monomial(c, -v))?;
        }
    }
    Ok(())
}

/// `Σ_{n >= start} n^m y^n = P(y) / (1 - y)^{m+1}`; returns the Laurent coefficients of `P`.
pub fn power_sum_numerator(m: u32, start: i64) -> BTreeMap<i64, Rat> {
    let mut out = BTreeMap::new();
    for k in start..=start + m as i64 {
        let mut c = Rat::zero();
        for j in 0..=(m as i64 + 1).min(k - start) {
            let sgn = if j % 2 == 0 { rint(1) } else { rint(-1) };
            c += sgn * binom(m as i64 + 1, j) * rint((k - j).pow(m));
        }
        if !c.is_zero() {
            out.insert(k, c);
        }
    }
    out
}

fn tail_mellin<C: PoleField>(p: u64, g: &TailGerm<C>) -> Result<(TameChar, ZRat<C>)> {
    // Σ_{n >= N} coeff (1 - 1/q) (-n)^m (r z)^n.
    let r = g.ratio(p);
    let m = g.log_power;
    let sign = if m % 2 == 0 { C::one() } else { C::one().neg() };
    let base = g.coeff.mul(&C::one().sub(&C::q_pow(p, -1))).mul(&sign);
    let mut lc = BTreeMap::new();
    for (k, c) in power_sum_numerator(m, g.start) {
        lc.insert(k, C::from_rat(&c).mul(&field_pow(&r, k)?));
    }
    // (1 - r z)^{m+1} = (-r)^{m+1} (z - 1/r)^{m+1}.
    let lead = field_pow(&r.neg(), m as i64 + 1)?;
    let num = ZRat::laurent(&lc).scale(&base.div(&lead)?);
    Ok((g.tame.inverse(), num.mul(&ZRat::pole(r.inv()?, m + 1))?))
}

fn zero_mellin<C: PoleField>(p: u64, g: &ZeroGerm<C>) -> Result<(TameChar, ZRat<C>)> {
    // Σ_{v >= S} coeff (1 - 1/q) v^m (rho / z)^v = z^{m+1} P(rho/z) / (z - rho)^{m+1}.
    let m = g.log_power;
    let base = g.coeff.mul(&C::one().sub(&C::q_pow(p, -1)));
    let mut lc = BTreeMap::new();
    for (k, c) in power_sum_numerator(m, g.start) {
        lc.insert(m as i64 + 1 - k, C::from_rat(&c).mul(&field_pow(&g.rho, k)?));
    }
    let num = ZRat::laurent(&lc).scale(&base);
    Ok((g.tame.inverse(), num.mul(&ZRat::pole(g.rho.clone(), m + 1))?))
}

pub fn mellin_gm<C: PoleField>(f: &GmMeasure<C>) -> Result<MellinData<C>> {
    let p = f.p();
    let mut out = MellinData::zero(p);
    for (&v, t) in f.shells() {
        shell_components(p, v, t, &mut out)?;
    }
    Ok(out)
}

/// Mellin transform of an extended measure; germs become poles.
pub fn mellin<C: PoleField>(f: &ExtendedMeasure<C>) -> Result<MellinData<C>> {
    if f.has_provider() {
        return Err(PtwError::Invalid("near-zero shell data has no rational Mellin transform".into()));
    }
    let p = f.p();
    let mut out = mellin_gm(&f.compact)?;
    for g in &f.tails {
        let (t, r) = tail_mellin(p, g)?;
        out.add_component(&t, &r)?;
    }
    for g in &f.zeros {
        let (t, r) = zero_mellin(p, g)?;
        out.add_component(&t, &r)?;
    }
    Ok(out)
}

/// Coefficients `b_m` with `C(x + j - 1, j - 1) = Σ b_m x^m`.
fn rising_binomial_poly(j: u32, offset: i64) -> Vec<Rat> {
    // Π_{i=1}^{j-1} (x + offset + i) / (j-1)!
    let mut poly = vec![rint(1)];
    let mut fact = rint(1);
    for i in 1..j as i64 {
        let a = rint(offset + i);
        let mut next = vec![Rat::zero(); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += c * &a;
            next[k + 1] += c.clone();
        }
        poly = next;
        fact *= rint(i);
    }
    poly.into_iter().map(|c| c / &fact).collect()
}

/// Inverse Mellin transform through partial fractions in `z`.
///
/// Poles at `0` and Laurent terms give shells; a pole `a` with `|a| < 1` gives germs at
/// zero, one with `|a| > 1` tails at infinity (SL2 normalization), `|a| = 1` is rejected.
pub fn inverse_mellin<C: PoleField>(m: &MellinData<C>) -> Result<ExtendedMeasure<C>> {
    let p = m.p;
    let vol = C::one().sub(&C::q_pow(p, -1));
    let mut compact = GmMeasure::zero(p);
    let mut tails = Vec::new();
    let mut zeros = Vec::new();
    for (eta, r) in &m.comps {
        let r = r.simplify()?;
        if r.is_zero() {
            continue;
        }
        // Density on a shell carrying Mellin coefficient c in this component: c/(1 - 1/q) * eta(w).
        let germ_tame = eta.inverse();
        let put = |compact: &mut GmMeasure<C>, e: i64, c: &C| -> Result<()> {
            if c.near_zero() {
                return Ok(());
            }
            let t = ShellTable::twisted_constant(p, &germ_tame, &c.div(&vol)?)?;
            compact.add_shell(-e, &t);
            Ok(())
        };
        if r.poles.is_empty() {
            for (e, c) in r.laurent_coeffs().unwrap_or_default() {
                put(&mut compact, e, &c)?;
            }
            continue;
        }
        let mut poles = r.poles.clone();
        let mut num = r.num.clone();
        let mut den = r.denominator();
        if r.low < 0 {
            poles.push(Pole { at: C::zero(), order: (-r.low) as u32 });
            den = shift_up(&den, (-r.low) as usize);
        } else {
            num = shift_up(&num, r.low as usize);
        }
        let pf = partial_fractions(&num, &den, &poles)?;
        for (k, c) in pf.poly.coeffs().iter().enumerate() {
            put(&mut compact, k as i64, c)?;
        }
        for (pole, coefs) in &pf.parts {
            for (jm1, c) in coefs.iter().enumerate() {
                if c.near_zero() {
                    continue;
                }
                let j = jm1 as u32 + 1;
                let a = &pole.at;
                if a.near_zero() {
                    put(&mut compact, -(j as i64), c)?;
                    continue;
                }
                match a.cmp_unit()? {
                    Ordering::Less => {
                        // 1/(z-a)^j = Σ_{v >= 1} C(v-1, j-1) a^{v-j} z^{-v}.
                        let poly = rising_binomial_poly(j, -(j as i64));
                        let base = c.mul(&field_pow(a, -(j as i64))?).div(&vol)?;
                        for (mp, b) in poly.iter().enumerate() {
                            if b.is_zero() {
                                continue;
                            }
                            zeros.push(ZeroGerm { tame: germ_tame.clone(), rho: a.clone(), log_power: mp as u32, coeff: base.scale(b), start: 1 });
                        }
                    }
                    _ => {
                        // 1/(z-a)^j = (-a)^{-j} Σ_{n >= 0} C(n+j-1, j-1) a^{-n} z^n, shell v = -n.
                        let poly = rising_binomial_poly(j, 0);
                        let base = c.mul(&field_pow(&a.neg(), -(j as i64))?).div(&vol)?;
                        let r = a.inv()?;
                        for (mp, b) in poly.iter().enumerate() {
                            if b.is_zero() {
                                continue;
                            }
                            // n^m = (-1)^m (-n)^m.
                            let sgn = if mp % 2 == 0 { rint(1) } else { rint(-1) };
                            tails.push(TailGerm {
                                tame: germ_tame.clone(),
                                z: r.mul(&C::q_pow(p, -1)),
                                log_power: mp as u32,
                                coeff: base.scale(&(b * sgn)),
                                start: 0,
                                norm: GermNorm::SL2,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(ExtendedMeasure { compact, tails, zeros, near_zero: None }.canonical())
}

/// `∫_{Z_p^x} psi(beta w) chi_t(w) d^x w`.
pub fn shell_psi_integral<C: Coeff>(p: u64, tame: &TameChar, beta: &Rat) -> Result<C> {
    let e = match val_rat(p, beta) {
        None => i64::MAX,
        Some(e) => e,
    };
    let f = tame.conductor() as i64;
    if f == 0 {
        return Ok(if e >= 0 {
            C::one().sub(&C::q_pow(p, -1))
        } else if e == -1 {
            C::q_pow(p, -1).neg()
        } else {
            C::zero()
        });
    }
    if e != -f {
        return Ok(C::zero());
    }
    let m = pz(p, f as u32);
    let mut acc = C::zero();
    for w in (1..m).filter(|w| w % p != 0) {
        let x = beta * Rat::from_integer(BigInt::from(w));
        acc = acc.add(&tame.value::<C>(w)?.mul(&C::psi(p, &x)?));
    }
    Ok(acc.mul(&C::q_pow(p, -f)))
}

// ∫_{ball} chi(x)|x|^s d^x x for a plain ball, with zq = chi(p) q^{-s}.
fn ball_zeta<C: Field>(b: &Ball, chi: &MultChar, zq: &C) -> Result<C> {
    let p = b.p();
    let n = b.level();
    if b.center().is_zero() {
        if !chi.is_unramified() {
            return Ok(C::zero());
        }
        let d = C::one().sub(zq);
        if d.near_zero() {
            return Err(PtwError::PoleHit);
        }
        return C::one().sub(&C::q_pow(p, -1)).mul(&field_pow(zq, n)?).div(&d);
    }
    let v = val_rat(p, b.center()).unwrap();
    let f = chi.conductor() as i64;
    if f > n - v {
        return Ok(C::zero());
    }
    let unit = crate::field::unit_residue(p, b.center(), f as u32)?;
    Ok(field_pow(zq, v)?.mul(&chi.tame.value::<C>(unit)?).mul(&C::q_pow(p, v - n)))
}

/// `Z(Phi, chi, s) = ∫ Phi(x) chi(x) |x|^s d^x x` with `qs = q^{-s}`.
pub fn tate_zeta<C: Field>(phi: &GaMeasure<C>, chi: &MultChar, qs: &C) -> Result<C> {
    if C::SYMBOLIC && !chi.is_unramified() {
        return Err(PtwError::SymbolicRamified);
    }
    let p = phi.p;
    let zq = chi.z_as::<C>()?.mul(qs);
    let mut acc = C::zero();
    for t in &phi.terms {
        if t.coeff.is_zero() {
            continue;
        }
        let val = if t.phase.is_zero() {
            ball_zeta(&t.ball, chi, &zq)?
        } else {
            let e0 = val_rat(p, &t.phase).unwrap();
            let n = t.ball.level();
            let lvl = n.max(-e0);
            if !t.ball.center().is_zero() {
                let mut s = C::zero();
                for b in t.ball.refine(lvl) {
                    s = s.add(&C::psi(p, &(&t.phase * b.center()))?.mul(&ball_zeta(&b, chi, &zq)?));
                }
                s
            } else {
                let mut s = C::zero();
                for m in n..lvl {
                    let beta = &t.phase * crate::arith::p_pow(p, m);
                    let sh: C = shell_psi_integral(p, &chi.tame, &beta)?;
                    if !sh.is_zero() {
                        s = s.add(&sh.mul(&field_pow(&zq, m)?));
                    }
                }
                s.add(&ball_zeta(&Ball::new(p, &Rat::zero(), lvl)?, chi, &zq)?)
            }
        };
        acc = acc.add(&t.coeff.mul(&val));
    }
    Ok(acc)
}

/// Both sides of `gamma(chi, s, psi) Z(Phi, chi, s) = Z(Phi^, chi^{-1}, 1 - s)`.
#[derive(Clone, Debug, Serialize)]
pub struct FeReport<C> {
    pub lhs: C,
    pub rhs: C,
    pub deviation: f64,
}

impl<C> FeReport<C> {
    pub fn passes(&self, tol: f64) -> bool {
        self.deviation <= tol
    }
}

pub fn verify_functional_equation<C: Field>(phi: &GaMeasure<C>, chi: &MultChar, qs: &C) -> Result<FeReport<C>> {
    let p = phi.p;
    let lhs = gamma_value(chi, qs, 1)?.mul(&tate_zeta(phi, chi, qs)?);
    let hat = crate::measures::additive_fourier(phi, 1)?;
    let dual = C::q_pow(p, -1).div(qs)?;
    let inv = chi.inverse()?;
    let rhs = tate_zeta(&hat, &inv, &dual)?;
    let deviation = lhs.deviation(&rhs);
    Ok(FeReport { lhs, rhs, deviation })
}

/// `Res_{s=0} Z(Phi, 1, s)`, from a contour average of `(1 - u) Z` around `u = 1`.
pub fn zeta_residue(phi: &GaMeasure<NumC>) -> Result<NumC> {
    let p = phi.p;
    let chi = MultChar::unramified(p, crate::arith::Scalar::Numeric(NumC::ONE))?;
    let n = 256;
    let mut acc = NumC::ZERO;
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
        let u = NumC::new(1.0 + 0.5 * th.cos(), 0.5 * th.sin());
        let z = tate_zeta(phi, &chi, &u)?;
        acc += (NumC::ONE - u) * z;
    }
    let r = acc / NumC::real(n as f64);
    Ok(r / NumC::real((p as f64).ln()))
}

/// Multiplicative convolution on `F^x` against `d^x x`.
pub fn convolve<C: Coeff>(f: &GmMeasure<C>, g: &GmMeasure<C>) -> GmMeasure<C> {
    let p = f.p();
    let mut out = GmMeasure::zero(p);
    for (&v1, t1) in f.shells() {
        for (&v2, t2) in g.shells() {
            if t1.level == 0 && t2.level == 0 {
                let vol = C::one().sub(&C::q_pow(p, -1));
                out.add_shell(v1 + v2, &ShellTable::constant(t1.vals[0].mul(&t2.vals[0]).mul(&vol)));
                continue;
            }
            let l = t1.level.max(t2.level).max(1);
            let a = t1.refine(p, l);
            let b = t2.refine(p, l);
            let m = pz(p, l);
            let mut vals = vec![C::zero(); m as usize];
            let vol = C::q_pow(p, -(l as i64));
            for r in (1..m).filter(|r| r % p != 0) {
                if a.vals[r as usize].is_zero() {
                    continue;
                }
                for s in (1..m).filter(|s| s % p != 0) {
                    let c = a.vals[r as usize].mul(&b.vals[s as usize]);
                    if !c.is_zero() {
                        let k = crate::chars::mulmod(r, s, m) as usize;
                        vals[k] = vals[k].add(&c.mul(&vol));
                    }
                }
            }
            out.add_shell(v1 + v2, &ShellTable { level: l, vals });
        }
    }
    out
}
