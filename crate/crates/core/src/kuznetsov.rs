//! Test measures for the Kuznetsov quotient `N\G//N` of SL2 and PGL2.
//!
//! A spherical Whittaker function `Σ_m b_m e^{-m α̌}` is pushed forward to the
//! coordinate line through the big-cell section. Shells `|ζ| >= 1` have closed
//! forms; the shells inside the unit ball carry Kloosterman sums and are
//! evaluated at a concrete prime.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::arith::{p_pow, Coeff, Cyclo, Field, Rat, RatFunc, Scalar};
use crate::chars::{field_pow, unit_inverse, units_mod, MultChar};
use crate::error::{PtwError, Result};
use crate::field::pz;
use crate::measures::{ExtendedMeasure, GermNorm, GmMeasure, ShellProvider, ShellTable, TailGerm};
use crate::oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupTag {
    SL2,
    PGL2,
}

impl GroupTag {
    /// Exponent of `|coordinate|` in the modular character on the section.
    pub fn delta_exponent(self) -> i64 {
        match self {
            GroupTag::SL2 => 2,
            GroupTag::PGL2 => 1,
        }
    }

    /// Each coset pushforward lives on two shells this many valuations apart.
    pub fn shell_gap(self) -> i64 {
        match self {
            GroupTag::SL2 => 1,
            GroupTag::PGL2 => 2,
        }
    }

    /// `(1 - q^{-d})^{-1}`: inverse volume of `K` in big-cell coordinates
    /// `dn · δ d^x a · dn` with `dn(N(o)) = 1`, `dg(K) = 1`.
    pub fn haar_constant<C: Field>(self, p: u64) -> Result<C> {
        C::one().sub(&C::q_pow(p, -self.delta_exponent())).inv()
    }

    pub fn germ_norm(self) -> GermNorm {
        match self {
            GroupTag::SL2 => GermNorm::SL2,
            GroupTag::PGL2 => GermNorm::PGL2,
        }
    }

    /// The Weyl-element section over the coordinate `x`.
    pub fn section(self, x: &Rat) -> Result<[[Rat; 2]; 2]> {
        use num::{One, Zero};
        if x.is_zero() {
            return Err(PtwError::ZeroInput);
        }
        Ok(match self {
            GroupTag::SL2 => [[Rat::zero(), -(Rat::one() / x)], [x.clone(), Rat::zero()]],
            GroupTag::PGL2 => [[Rat::zero(), -Rat::one()], [x.clone(), Rat::zero()]],
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupTag::SL2 => "sl2",
            GroupTag::PGL2 => "pgl2",
        }
    }
}

/// The `K`-spherical `(N, psi)`-Whittaker function attached to the coweight `-m α̌`
/// (SL2, value `q^{-m}` at `e^{-m α̌}(p)`) or `-m α̌/2` (PGL2, value 1: the factor
/// `q^{-m/2}` is carried by the series variables).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WhittakerCosetElement {
    pub group: GroupTag,
    pub m: u32,
}

/// Converts an exact cyclotomic value; the symbolic ring only takes rationals.
pub fn cyclo_to<C: Coeff>(p: u64, c: &Cyclo) -> Result<C> {
    if C::SYMBOLIC {
        let r = c.to_rat().ok_or(PtwError::SymbolicRootOfUnity)?;
        Ok(C::from_rat(&r))
    } else {
        C::from_scalar(p, &Scalar::Numeric(c.to_complex()))
    }
}

/// Shells `v >= 0` (SL2) or `v >= 2` (PGL2) of the `λ̌ = 0` pushforward, times a coefficient,
/// from Kloosterman sums at `q = p`. Tables are cached on first use.
#[derive(Debug)]
pub struct KloostermanShells<C> {
    pub group: GroupTag,
    pub p: u64,
    pub coeff: C,
    cache: RwLock<BTreeMap<i64, ShellTable<C>>>,
}

impl<C: Coeff + Field> KloostermanShells<C> {
    pub fn new(group: GroupTag, p: u64, coeff: C) -> Self {
        KloostermanShells { group, p, coeff, cache: RwLock::new(BTreeMap::new()) }
    }

    fn compute(&self, v: i64) -> Result<ShellTable<C>> {
        let p = self.p;
        if v < 0 {
            return Ok(ShellTable::zero());
        }
        let (level, weight) = match self.group {
            // ζ = p^j / W: O = S(W^2, 1; p^j), density Z O |ζ|^2.
            GroupTag::SL2 => (v as u32, p_pow(p, -2 * v) / (Rat::from_integer(1.into()) - p_pow(p, -2))),
            // ξ = p^{2k} / U: O = S(1, U; p^k), density ζ(1) O |ξ|; odd shells vanish.
            GroupTag::PGL2 => {
                if v % 2 != 0 {
                    return Ok(ShellTable::zero());
                }
                ((v / 2) as u32, p_pow(p, -v) / (Rat::from_integer(1.into()) - p_pow(p, -1)))
            }
        };
        if level == 0 {
            return Ok(ShellTable::constant(self.coeff.mul(&C::from_rat(&weight))));
        }
        let modulus = pz(p, level);
        let mut vals = vec![C::zero(); modulus as usize];
        for r in units_mod(p, level) {
            let w = unit_inverse(p, r, level);
            let s = match self.group {
                GroupTag::SL2 => oracle::kloosterman(p, level, crate::chars::mulmod(w, w, modulus) as i64, 1),
                GroupTag::PGL2 => oracle::kloosterman(p, level, 1, w as i64),
            };
            vals[r as usize] = cyclo_to::<C>(p, &s.scale(&weight))?.mul(&self.coeff);
        }
        Ok(ShellTable { level, vals }.coarsen(p))
    }
}

impl<C: Coeff + Field> ShellProvider<C> for KloostermanShells<C> {
    fn shell(&self, v: i64) -> Result<ShellTable<C>> {
        if let Some(t) = self.cache.read().unwrap().get(&v) {
            return Ok(t.clone());
        }
        let t = self.compute(v)?;
        self.cache.write().unwrap().entry(v).or_insert_with(|| t.clone());
        Ok(t)
    }
}

/// Shell densities (w.r.t. `d^x`) of a PGL2 pushforward for `m >= 1` by enumeration,
/// scanning two shells beyond the expected support on each side.
fn pgl2_shells_oracle<C: Coeff>(p: u64, m: u32) -> Result<Vec<(i64, ShellTable<C>)>> {
    let mut out = Vec::new();
    let lo = -(m as i64);
    for v in lo - 2..=lo + 4 {
        let mut vals = Vec::new();
        for u in 1..p {
            let xi = p_pow(p, v) * Rat::from_integer(u.into());
            vals.push(cyclo_to::<C>(p, &oracle::pgl2_density_oracle(p, m, &xi)?)?);
        }
        let mut full = vec![C::zero(); p as usize];
        for (i, x) in vals.into_iter().enumerate() {
            full[i + 1] = x;
        }
        let t = ShellTable { level: 1, vals: full }.coarsen(p);
        if !t.is_zero() {
            out.push((v, t));
        }
    }
    Ok(out)
}

/// Twisted pushforward of one Whittaker coset function to the coordinate line.
///
/// SL2 with `m >= 1` uses the closed form
/// `Z (q^m 1_{|ζ| = q^m} - q^{m-2} 1_{|ζ| = q^{m-1}}) d^x ζ`, `Z = (1 - q^{-2})^{-1}`.
/// The remaining cases need the enumeration oracle (`use_oracle`).
pub fn pushforward_coset<C: Coeff + Field>(e: WhittakerCosetElement, p: u64, use_oracle: bool) -> Result<ExtendedMeasure<C>> {
    let g = e.group;
    let m = e.m as i64;
    match (g, e.m) {
        (GroupTag::SL2, 0) | (GroupTag::PGL2, 0) => {
            if !use_oracle {
                return Err(PtwError::OracleRequired);
            }
            let mut f = ExtendedMeasure::zero(p);
            f.compact.add_shell(0, &ShellTable::constant(g.haar_constant::<C>(p)?));
            let from = if g == GroupTag::SL2 { 1 } else { 2 };
            f.near_zero = Some((from, Arc::new(KloostermanShells::new(g, p, C::one()))));
            Ok(f)
        }
        (GroupTag::SL2, _) => {
            let z: C = g.haar_constant(p)?;
            let mut c = GmMeasure::zero(p);
            c.add_shell(-m, &ShellTable::constant(z.mul(&C::q_pow(p, m))));
            c.add_shell(-m + 1, &ShellTable::constant(z.mul(&C::q_pow(p, m - 2)).neg()));
            Ok(ExtendedMeasure::from_compact(c))
        }
        (GroupTag::PGL2, _) => {
            if !use_oracle {
                return Err(PtwError::OracleRequired);
            }
            let mut c = GmMeasure::zero(p);
            for (v, t) in pgl2_shells_oracle::<C>(p, e.m)? {
                c.add_shell(v, &t);
            }
            Ok(ExtendedMeasure::from_compact(c))
        }
    }
}

/// An element of the spherical Hecke algebra through its Satake transform, a
/// `z <-> z^{-1}` symmetric Laurent polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct HeckeElement<C> {
    pub group: GroupTag,
    pub coeffs: BTreeMap<i64, C>,
}

impl<C: Coeff + Field> HeckeElement<C> {
    pub fn identity(group: GroupTag) -> Self {
        HeckeElement { group, coeffs: BTreeMap::from([(0, C::one())]) }
    }

    pub fn new(group: GroupTag, coeffs: BTreeMap<i64, C>) -> Result<Self> {
        let coeffs: BTreeMap<i64, C> = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        for (k, c) in &coeffs {
            if coeffs.get(&-k) != Some(c) {
                return Err(PtwError::Invalid(format!("Satake transform not symmetric at z^{k}")));
            }
        }
        Ok(HeckeElement { group, coeffs })
    }

    /// The indicator of `K e^{-m α̌}(p) K`: `q^m (χ_m - q^{-1} χ_{m-1})`, `χ_m = Σ_{|k| <= m} z^k`.
    pub fn basis(p: u64, m: u32) -> Self {
        let m = m as i64;
        let mut coeffs = BTreeMap::new();
        for k in -m..=m {
            let inner = if k.abs() < m { C::one().sub(&C::q_pow(p, -1)) } else { C::one() };
            coeffs.insert(k, inner.mul(&C::q_pow(p, m)));
        }
        HeckeElement { group: GroupTag::SL2, coeffs }
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn coeff(&self, k: i64) -> C {
        self.coeffs.get(&k).cloned().unwrap_or_else(C::zero)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out: BTreeMap<i64, C> = BTreeMap::new();
        for (a, x) in &self.coeffs {
            for (b, y) in &o.coeffs {
                let e = out.entry(a + b).or_insert_with(C::zero);
                *e = e.add(&x.mul(y));
            }
        }
        HeckeElement { group: self.group, coeffs: out.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.coeffs.clone();
        for (k, c) in &o.coeffs {
            let e = out.entry(*k).or_insert_with(C::zero);
            *e = e.add(c);
        }
        HeckeElement { group: self.group, coeffs: out.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        HeckeElement { group: self.group, coeffs: self.coeffs.iter().map(|(k, x)| (*k, x.mul(c))).filter(|(_, x)| !x.is_zero()).collect() }
    }

    /// `ȟ(x)`.
    pub fn eval(&self, x: &C) -> Result<C> {
        let mut acc = C::zero();
        for (k, c) in &self.coeffs {
            acc = acc.add(&c.mul(&field_pow(x, *k)?));
        }
        Ok(acc)
    }
}

impl HeckeElement<RatFunc> {
    /// The Satake transform as a rational function of `z`.
    pub fn satake(&self) -> RatFunc {
        let mut out = RatFunc::zero();
        for (k, c) in &self.coeffs {
            out = out.add(&c.mul(&RatFunc::z().pow(*k)));
        }
        out
    }
}

/// Applies the single convention adapter between Satake parameters and the spectral
/// variable. For the groups here it is the identity: every `ȟ` is `z <-> z^{-1}` symmetric.
pub fn satake_adapter(h: &RatFunc) -> RatFunc {
    h.clone()
}

/// Which representation the basic vector's L-value is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RTag {
    /// `L(Ad, s)` on SL2.
    Ad,
    /// `L(Std, s1) L(Std, s2)` on PGL2.
    StdStd,
}

/// A member of the Hecke-generated family: `h · f_{L(r,s)}`, or `h · f_0` for the
/// standard basic element (the pushforward of `λ̌ = 0`) when `u` is absent.
///
/// For SL2, `u = q^{-s}`. For PGL2 the variables are effective: `u = q^{-s1 - 1/2}`,
/// `w = q^{-s2 - 1/2}`, which absorbs the half-integral normalizations.
#[derive(Clone, Debug, PartialEq)]
pub struct KuznetsovVector<C> {
    pub group: GroupTag,
    pub r: RTag,
    pub hecke: HeckeElement<C>,
    pub u: Option<C>,
    pub w: Option<C>,
}

impl<C: Coeff + Field> KuznetsovVector<C> {
    /// The pushforward of the `λ̌ = 0` element.
    pub fn standard(group: GroupTag) -> Self {
        let r = if group == GroupTag::SL2 { RTag::Ad } else { RTag::StdStd };
        KuznetsovVector { group, r, hecke: HeckeElement::identity(group), u: None, w: None }
    }

    /// `f_{L(Ad, s)}` with `u = q^{-s}`.
    pub fn basic_ad(u: C) -> Self {
        KuznetsovVector { group: GroupTag::SL2, r: RTag::Ad, hecke: HeckeElement::identity(GroupTag::SL2), u: Some(u), w: None }
    }

    /// `f_{L(Std, s1) L(Std, s2)}` in effective variables.
    pub fn basic_std2(u: C, w: C) -> Self {
        KuznetsovVector { group: GroupTag::PGL2, r: RTag::StdStd, hecke: HeckeElement::identity(GroupTag::PGL2), u: Some(u), w: Some(w) }
    }

    /// Whittaker coefficient `b_m` of `e^{-m α̌}` (SL2) or `e^{-m α̌/2}` (PGL2).
    pub fn whittaker_coeff(&self, p: u64, m: i64) -> Result<C> {
        if m < 0 {
            return Ok(C::zero());
        }
        match self.group {
            // b_m = [z^{-m}] (1 - z) ȟ(z) L(z).
            GroupTag::SL2 => Ok(self.series_coeff(-m)?.sub(&self.series_coeff(-m - 1)?)),
            GroupTag::PGL2 => {
                if self.hecke != HeckeElement::identity(GroupTag::PGL2) {
                    return Err(PtwError::OutsideHeckeFamily);
                }
                match (&self.u, &self.w) {
                    (None, _) => Ok(if m == 0 { C::one() } else { C::zero() }),
                    (Some(u), Some(w)) => std2_coeff(p, u, w, m),
                    _ => Err(PtwError::Invalid("PGL2 basic vector needs two exponents".into())),
                }
            }
        }
    }

    /// Laurent coefficient of `z^n` in `ȟ(z) L(Ad, s)(z)` on the annulus `|u| < |z| < |u|^{-1}`,
    /// where `L(Ad, s) = 1 / ((1 - u)(1 - u z)(1 - u / z))`.
    fn series_coeff(&self, n: i64) -> Result<C> {
        match &self.u {
            None => Ok(self.hecke.coeff(n)),
            Some(u) => {
                let one = C::one();
                let den = one.sub(u).mul(&one.sub(&u.mul(u)));
                let mut acc = C::zero();
                for (k, h) in &self.hecke.coeffs {
                    acc = acc.add(&h.mul(&field_pow(u, (n - k).abs())?));
                }
                acc.div(&den)
            }
        }
    }

    /// Shell index from which the measure is a pure geometric tail.
    pub fn tail_start(&self) -> i64 {
        match self.group {
            GroupTag::SL2 => self.hecke.degree(),
            GroupTag::PGL2 => 0,
        }
    }

    /// Density on the shell `|coord| = q^j`, `j >= 0`, assembled from the Whittaker series.
    pub fn outer_shell(&self, p: u64, j: i64) -> Result<C> {
        let z: C = self.group.haar_constant(p)?;
        let (a, b) = (self.whittaker_coeff(p, j)?, self.whittaker_coeff(p, j + self.group.shell_gap())?);
        // SL2: Z q^j (b_j - q^{-1} b_{j+1}); PGL2: ζ(1) q^j (b_j - b_{j+2}).
        let inner = match self.group {
            GroupTag::SL2 => a.sub(&b.mul(&C::q_pow(p, -1))),
            GroupTag::PGL2 => a.sub(&b),
        };
        Ok(z.mul(&C::q_pow(p, j)).mul(&inner))
    }

    /// The tail at infinity in closed form: `(ratio, coefficient)` pairs with
    /// density `coefficient * ratio^j` on `|coord| = q^j`, `j >= tail_start`.
    pub fn tail_closed_form(&self, p: u64) -> Result<Vec<(C, C)>> {
        let one = C::one();
        let q = C::q_pow(p, 1);
        let qi = C::q_pow(p, -1);
        match (self.group, &self.u, &self.w) {
            (_, None, _) => Ok(vec![]),
            (GroupTag::SL2, Some(u), _) => {
                // Z ȟ(u) (1 - u/q) / (1 - u^2) (q u)^j
                let z: C = self.group.haar_constant(p)?;
                let c = z.mul(&self.hecke.eval(u)?).mul(&one.sub(&u.mul(&qi))).div(&one.sub(&u.mul(u)))?;
                Ok(vec![(q.mul(u), c)])
            }
            (GroupTag::PGL2, Some(u), Some(w)) => {
                // ζ(1) [u (1 - u^2) (q u)^j - w (1 - w^2) (q w)^j] / ((u - w)(1 - q u w))
                let z: C = self.group.haar_constant(p)?;
                let den = u.sub(w).mul(&one.sub(&q.mul(u).mul(w)));
                let cu = z.mul(u).mul(&one.sub(&u.mul(u))).div(&den)?;
                let cw = z.mul(w).mul(&one.sub(&w.mul(w))).div(&den)?.neg();
                Ok(vec![(q.mul(u), cu), (q.mul(w), cw)])
            }
            _ => Err(PtwError::Invalid("PGL2 basic vector needs two exponents".into())),
        }
    }

    /// Realizes the vector as an extended measure: explicit shells down to the
    /// tail, the closed-form tail, and (if `near_zero`) the Kloosterman shells
    /// inside the unit ball evaluated at `q = p`.
    pub fn realize(&self, p: u64, near_zero: bool) -> Result<ExtendedMeasure<C>> {
        let g = self.group;
        let mut compact = GmMeasure::zero(p);
        let start = self.tail_start();
        let tails = self.tail_closed_form(p)?;
        let explicit_hi = if tails.is_empty() { self.hecke.degree() + 1 } else { start - 1 };
        for j in 0..=explicit_hi {
            let d = self.outer_shell(p, j)?;
            if !d.is_zero() {
                compact.add_shell(-j, &ShellTable::constant(d));
            }
        }
        let b0 = self.whittaker_coeff(p, 0)?;
        let mut near = None;
        match g {
            GroupTag::SL2 => {
                if near_zero {
                    near = Some((1, Arc::new(KloostermanShells::new(g, p, b0)) as Arc<dyn ShellProvider<C>>));
                }
            }
            GroupTag::PGL2 => {
                // Shell v = 1 receives -ζ(1) q^{-1} b_1 from m = 1.
                let z: C = g.haar_constant(p)?;
                let b1 = self.whittaker_coeff(p, 1)?;
                let d = z.mul(&C::q_pow(p, -1)).mul(&b1).neg();
                if !d.is_zero() {
                    compact.add_shell(1, &ShellTable::constant(d));
                }
                if near_zero {
                    near = Some((2, Arc::new(KloostermanShells::new(g, p, b0)) as Arc<dyn ShellProvider<C>>));
                }
            }
        }
        let norm = g.germ_norm();
        let tails = tails
            .into_iter()
            .map(|(ratio, coeff)| {
                // TailGerm stores z with ratio z q (SL2) or z (PGL2).
                let z = match norm {
                    GermNorm::SL2 => ratio.mul(&C::q_pow(p, -1)),
                    GermNorm::PGL2 => ratio,
                };
                TailGerm { tame: crate::chars::TameChar::trivial(p), z, log_power: 0, coeff, start, norm }
            })
            .collect();
        Ok(ExtendedMeasure { compact, tails, zeros: vec![], near_zero: near })
    }

    /// Same vector assembled as `Σ_m b_m · pushforward_coset(m)` on shells `|coord| >= 1`,
    /// for the cosets `m <= max_m`; an independent route to `outer_shell`.
    pub fn assemble_from_cosets(&self, p: u64, max_m: u32, use_oracle: bool) -> Result<GmMeasure<C>> {
        let mut out = GmMeasure::zero(p);
        for m in 0..=max_m {
            let b = self.whittaker_coeff(p, m as i64)?;
            if b.is_zero() {
                continue;
            }
            let f = pushforward_coset::<C>(WhittakerCosetElement { group: self.group, m }, p, use_oracle)?;
            let mut w = f.compact.window(i64::MIN / 2, 0);
            w = w.scale(&b);
            out = out.add(&w);
        }
        Ok(out)
    }

    pub fn hecke_act(&self, h: &HeckeElement<C>) -> Result<Self> {
        if h.group != self.group {
            return Err(PtwError::OutsideHeckeFamily);
        }
        if self.group == GroupTag::PGL2 && h != &HeckeElement::identity(GroupTag::PGL2) {
            return Err(PtwError::OutsideHeckeFamily);
        }
        Ok(KuznetsovVector { hecke: self.hecke.mul(h), ..self.clone() })
    }
}

/// `c_m` of `L(Std, s1) L(Std, s2) = Σ c_m s_m(y)` with `s_m` the characters of `Sym^m`,
/// rescaled by `q^{-m/2}`: in effective variables
/// `(u^{m+1} - w^{m+1}) / ((u - w)(1 - q u w))`.
fn std2_coeff<C: Field>(p: u64, u: &C, w: &C, m: i64) -> Result<C> {
    let mut h = C::zero();
    for i in 0..=m {
        h = h.add(&field_pow(u, i)?.mul(&field_pow(w, m - i)?));
    }
    h.div(&C::one().sub(&C::q_pow(p, 1).mul(u).mul(w)))
}

/// `J_χ(std basic) = (1 - z/q)(1 - 1/(z q)) / (1 + 1/q)`.
pub fn bessel_standard() -> RatFunc {
    let qi = RatFunc::q_pow(-1);
    let z = RatFunc::z();
    let zi = z.pow(-1);
    let one = RatFunc::one();
    one.sub(&z.mul(&qi)).mul(&one.sub(&zi.mul(&qi))).div(&one.add(&qi)).unwrap()
}

/// `L(Ad, s)` at the unramified parameter `z`, `u = q^{-s}`.
pub fn l_adjoint(u: &RatFunc) -> RatFunc {
    let one = RatFunc::one();
    let z = RatFunc::z();
    let d = one.sub(u).mul(&one.sub(&u.mul(&z))).mul(&one.sub(&u.mul(&z.pow(-1))));
    one.div(&d).unwrap()
}

/// The Bessel relative character on the SL2 Hecke family, spectrally:
/// `J_χ(h · f_L) = adapter(ȟ)(z) L(Ad, s)(z) J_χ(std)`.
pub fn bessel_character(chi: &MultChar, f: &KuznetsovVector<RatFunc>) -> Result<RatFunc> {
    if f.group != GroupTag::SL2 {
        return Err(PtwError::OutsideHeckeFamily);
    }
    if !chi.is_unramified() {
        return Err(PtwError::Invalid("Bessel characters are unramified only".into()));
    }
    let mut j = satake_adapter(&f.hecke.satake()).mul(&bessel_standard());
    if let Some(u) = &f.u {
        j = j.mul(&l_adjoint(u));
    }
    let z = chi.z_as::<RatFunc>()?;
    if z == RatFunc::z() {
        return Ok(j);
    }
    j.compose(crate::arith::Var::Z, &z)
}

/// `<π(n_y) φ_K, φ_K>` on `v(y) = v`, by the Macdonald formula for `e^{v α̌}(p)`:
/// `q^{v}/(1 + q^{-1}) [z^{-v} c(z) + z^{v} c(z^{-1})]`, `c(z) = (1 - q^{-1} z^{-1})/(1 - z^{-1})`.
pub fn spherical_coefficient(v: i64) -> Result<RatFunc> {
    if v >= 0 {
        return Ok(RatFunc::one());
    }
    let m = -v;
    let z = RatFunc::z();
    let zi = z.pow(-1);
    let qi = RatFunc::q_pow(-1);
    let one = RatFunc::one();
    let c = |x: &RatFunc| -> Result<RatFunc> {
        let xi = x.pow(-1);
        one.sub(&qi.mul(&xi)).div(&one.sub(&xi))
    };
    let s = z.pow(m).mul(&c(&z)?).add(&zi.pow(m).mul(&c(&zi)?));
    RatFunc::q_pow(-m).mul(&s).div(&one.add(&qi))
}

/// Numeric value of the spherical coefficient at a concrete `z` and `q = p`.
pub fn spherical_at(p: u64, z: crate::arith::NumC, v: i64) -> Result<crate::arith::NumC> {
    if z.abs() < 1e-300 {
        return Err(PtwError::DegenerateParameter("z = 0".into()));
    }
    let f = spherical_coefficient(v)?;
    let mut vals = BTreeMap::new();
    vals.insert(crate::arith::Var::Z, z);
    vals.insert(crate::arith::Var::Q, crate::arith::NumC::real(p as f64));
    f.eval_complex(&vals)
}
