//! The trace line: transfer of SL2 Kuznetsov measures by `ψ(ζ) dζ`, pushforwards of
//! Hecke measures along the trace, and the stable pairing against split characters.
//! Also the spectral transfer to the PGL2 torus side and the family-coordinate checks.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{modinv_u64, p_pow, residue_mod, val_rat, Cyclo, Rat, RatFunc, Var};
use crate::chars::{mulmod, MultChar, TameChar};
use crate::conv::ConvolutionKernel;
use crate::error::{PtwError, Result};
use crate::field::{pz, Ball};
use crate::kuznetsov::{GroupTag, HeckeElement, KuznetsovVector};
use crate::measures::ExtendedMeasure;
use crate::mellin::{mellin, shell_psi_integral, MellinData, PoleField};
use crate::oracle::TraceOracle;

/// Anything that assigns exact masses to balls of the trace line.
pub trait TraceMassSource: Sync {
    fn prime(&self) -> u64;
    fn mass(&self, ball: &Ball) -> Result<Rat>;
}

fn at_p(p: u64, f: &RatFunc) -> Result<Rat> {
    f.substitute(&[(Var::Q, Rat::from_integer(p.into()))])?.constant_value().ok_or_else(|| PtwError::Invalid(format!("value depends on free parameters: {f}")))
}

/// `𝓣f` for an SL2 Kuznetsov vector with all parameters fixed, evaluated at `q = p`.
///
/// With `f = F(ζ) d^x ζ` and `w = 1/ζ`, the mass of `c + p^n O` is
/// `q^{-n} ∫_{|w| <= q^n} F(1/w) ψ(c w) dw`, taken shell by shell in `w`.
#[derive(Clone, Debug)]
pub struct Transferred {
    pub p: u64,
    /// `b_0 Z`: the Kloosterman shells inside the unit ball carry `b_0 Z q^{-2j} S(W^2, 1; p^j)`.
    kloost: Rat,
    /// Densities on `|ζ| = q^j` for `j < outer.len()`.
    outer: Vec<Rat>,
    /// `coeff * ratio^j` beyond `outer`.
    tail: Option<(Rat, Rat)>,
}

impl Transferred {
    pub fn new(f: &KuznetsovVector<RatFunc>, p: u64) -> Result<Self> {
        if f.group != GroupTag::SL2 {
            return Err(PtwError::Invalid("the trace transfer is defined for SL2 vectors".into()));
        }
        let z: Rat = at_p(p, &GroupTag::SL2.haar_constant::<RatFunc>(p)?)?;
        let kloost = z * at_p(p, &f.whittaker_coeff(p, 0)?)?;
        let tails = f.tail_closed_form(p)?;
        let explicit = if tails.is_empty() { f.hecke.degree() + 2 } else { f.tail_start() };
        let outer = (0..explicit).map(|j| at_p(p, &f.outer_shell(p, j)?)).collect::<Result<Vec<_>>>()?;
        let tail = match tails.as_slice() {
            [] => None,
            [(r, c)] => Some((at_p(p, r)?, at_p(p, c)?)),
            _ => return Err(PtwError::Invalid("unexpected tail shape".into())),
        };
        Ok(Transferred { p, kloost, outer, tail })
    }

    fn density(&self, j: i64) -> Rat {
        match self.outer.get(j as usize) {
            Some(d) => d.clone(),
            None => match &self.tail {
                Some((r, c)) => c * pow_rat(r, j),
                None => Rat::zero(),
            },
        }
    }
}

fn pow_rat(r: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num::pow::pow(r.clone(), e as usize)
    } else {
        num::pow::pow(r.recip(), (-e) as usize)
    }
}

/// `Σ_{W, x ∈ (Z/p^j)^x} ψ((W^2 x + x^{-1} + c W) / p^j)`, a rational number.
pub fn kloosterman_shell_sum(p: u64, j: u32, c: &Rat) -> Result<Rat> {
    let m = pz(p, j);
    let c0 = residue_mod(c, m);
    let inv: Vec<u64> = (0..m).map(|x| if x % p == 0 { 0 } else { modinv_u64(x, m).unwrap() }).collect();
    let hist = (0..m)
        .into_par_iter()
        .filter(|w| w % p != 0)
        .fold(
            || vec![0i64; m as usize],
            |mut h, w| {
                let w2 = mulmod(w, w, m);
                let cw = mulmod(c0, w, m);
                for x in (1..m).filter(|x| x % p != 0) {
                    let e = (mulmod(w2, x, m) + inv[x as usize] + cw) % m;
                    h[e as usize] += 1;
                }
                h
            },
        )
        .reduce(
            || vec![0i64; m as usize],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Cyclo::from_hist(p, j, &hist, &Rat::one()).to_rat().ok_or_else(|| PtwError::Invalid("Kloosterman shell sum is irrational".into()))
}

impl TraceMassSource for Transferred {
    fn prime(&self) -> u64 {
        self.p
    }

    fn mass(&self, ball: &Ball) -> Result<Rat> {
        let p = self.p;
        let (n, c) = (ball.level(), ball.center());
        let vc = val_rat(p, c);
        let mut acc = Rat::zero();
        // |w| = q^j > 1: vanishes unless c is integral (sum over W + p^j t kills it).
        if n >= 1 && vc.map_or(true, |v| v >= 0) {
            for j in 1..=n {
                acc += &self.kloost * p_pow(p, -2 * j) * kloosterman_shell_sum(p, j as u32, c)?;
            }
        }
        // |w| = q^{-j} <= 1.
        let start = (-n).max(0);
        let integral_from = vc.map_or(start, |v| start.max(-v));
        let explicit_to = integral_from.max(self.outer.len() as i64);
        for j in start..explicit_to {
            let d = self.density(j);
            if d.is_zero() {
                continue;
            }
            let s = shell_psi_integral::<Cyclo>(p, &TameChar::trivial(p), &(c * p_pow(p, j)))?.to_rat().expect("unramified shell integral is rational");
            acc += d * p_pow(p, -j) * s;
        }
        if let Some((r, coeff)) = &self.tail {
            // Σ_{j >= J} coeff (r/q)^j (1 - 1/q)
            let x = r * p_pow(p, -1);
            if x.abs() >= Rat::one() {
                return Err(PtwError::NonSummableTail(format!("tail ratio {r} at the transfer")));
            }
            let one = Rat::one();
            acc += coeff * (&one - p_pow(p, -1)) * pow_rat(&x, explicit_to) / (&one - &x);
        }
        Ok(acc * p_pow(p, -n))
    }
}

/// `ζ(2)`-scaled oracle pushforward of `1_{K t_m K} dg` along the trace.
pub struct HeckeTrace {
    pub oracle: TraceOracle,
    pub scale: Rat,
}

impl HeckeTrace {
    pub fn new(p: u64, m: u32, max_level: i64, scale: Rat) -> Result<Self> {
        Ok(HeckeTrace { oracle: TraceOracle::new(p, m, max_level)?, scale })
    }
}

impl TraceMassSource for HeckeTrace {
    fn prime(&self) -> u64 {
        self.oracle.p
    }

    fn mass(&self, ball: &Ball) -> Result<Rat> {
        Ok(&self.scale * self.oracle.mass(ball)?)
    }
}

/// `ζ(2) = (1 - p^{-2})^{-1}`.
pub fn zeta2(p: u64) -> Rat {
    (Rat::one() - p_pow(p, -2)).recip()
}

/// Near `±2`, split mass on `v(t ∓ 2) = 2j` modeled as `q^{-2j}(α + β q^{-j})` for `j >= from`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularGerm {
    pub alpha: Rat,
    pub beta: Rat,
    pub from: i64,
}

/// A measure on the trace line: exact masses on a window of balls plus the split germ at `±2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceMeasure {
    pub p: u64,
    pub masses: BTreeMap<Ball, Rat>,
    pub germ: Option<SingularGerm>,
}

impl TraceMeasure {
    pub fn from_source(src: &dyn TraceMassSource, window: &[Ball], depth: u32, germ_levels: Option<u32>) -> Result<Self> {
        let masses = window.par_iter().map(|b| Ok((b.clone(), src.mass(b)?))).collect::<Result<BTreeMap<_, _>>>()?;
        let germ = match germ_levels {
            Some(l) => Some(SplitProfile::measure(src, depth, l)?.germ),
            None => None,
        };
        Ok(TraceMeasure { p: src.prime(), masses, germ })
    }
}

/// Trace pushforward of `1_{K t_m K} dg` on a window, germ fitted from `germ_levels` levels.
pub fn trace_pushforward(p: u64, m: u32, window: &[Ball], germ_levels: Option<u32>) -> Result<TraceMeasure> {
    let top = window.iter().map(|b| b.level()).max().unwrap_or(0).max(germ_levels.map_or(0, |l| 2 * l as i64 + 1));
    let src = HeckeTrace::new(p, m, top, Rat::one())?;
    TraceMeasure::from_source(&src, window, m, germ_levels)
}

/// `𝓣f` on a window.
pub fn transfer_kuznetsov_to_stable(f: &KuznetsovVector<RatFunc>, p: u64, window: &[Ball]) -> Result<TraceMeasure> {
    TraceMeasure::from_source(&Transferred::new(f, p)?, window, f.hecke.degree().max(0) as u32, None)
}

/// All balls `c + p^n O` with `c ∈ p^{-r} O`, for `n` in `levels`.
pub fn ball_window(p: u64, r: i64, levels: std::ops::RangeInclusive<i64>) -> Result<Vec<Ball>> {
    let mut out = Vec::new();
    for n in levels {
        let count = if n + r <= 0 { 1 } else { pz(p, (n + r) as u32) };
        for a in 0..count {
            out.push(Ball::new(p, &(Rat::from_integer(a.into()) * p_pow(p, -r)), n)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FlRow {
    pub ball: Ball,
    pub lhs: Rat,
    pub rhs: Rat,
}

impl FlRow {
    pub fn equal(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Ball-by-ball comparison of `𝓣(h_m f_{L(Ad,1)})` with `ζ(2)` times the trace pushforward
/// of `1_{K t_m K}`, the right side from the enumeration oracle.
pub fn fundamental_lemma_rows(p: u64, m: u32, window: &[Ball]) -> Result<Vec<FlRow>> {
    let f = KuznetsovVector::basic_ad(RatFunc::q_pow(-1)).hecke_act(&HeckeElement::basis(p, m))?;
    let lhs = Transferred::new(&f, p)?;
    let top = window.iter().map(|b| b.level()).max().unwrap_or(0);
    let rhs = HeckeTrace::new(p, m, top, zeta2(p))?;
    window.par_iter().map(|b| Ok(FlRow { ball: b.clone(), lhs: lhs.mass(b)?, rhs: rhs.mass(b)? })).collect()
}

/// The split-class data that the pairing needs: masses of the shells `|t| = q^k`,
/// of the split units away from `±2`, and of the split regions `v(t ∓ 2) = 2j`.
#[derive(Clone, Debug)]
pub struct SplitProfile {
    pub p: u64,
    pub shells: Vec<Rat>,
    pub unit_split: Rat,
    pub near: Vec<Rat>,
    pub germ: SingularGerm,
}

fn is_square_mod_p(p: u64, x: u64) -> bool {
    crate::measures::powmod(x % p, (p - 1) / 2, p) == 1
}

impl SplitProfile {
    /// Measures the profile with shells up to `depth + 2` (those beyond `depth` must vanish)
    /// and split regions `j = 1..=levels`; the germ is fitted on `levels - 2, levels - 1`
    /// and must reproduce `levels`.
    pub fn measure(src: &dyn TraceMassSource, depth: u32, levels: u32) -> Result<Self> {
        let p = src.prime();
        if p == 2 {
            return Err(PtwError::Invalid("split classes near ±2 need odd p".into()));
        }
        if levels < 3 {
            return Err(PtwError::Invalid("germ stability needs three levels".into()));
        }
        let zero = Rat::zero();
        let ball = |c: Rat, n: i64| Ball::new(p, &c, n);
        let mut shells = Vec::new();
        let mut prev = src.mass(&ball(zero.clone(), 0)?)?;
        for k in 1..=depth as i64 + 2 {
            let cur = src.mass(&ball(zero.clone(), -k)?)?;
            let s = &cur - &prev;
            if k > depth as i64 && !s.is_zero() {
                return Err(PtwError::Invalid(format!("mass on |t| = q^{k} beyond depth {depth}")));
            }
            if k <= depth as i64 {
                shells.push(s);
            }
            prev = cur;
        }
        let mut unit_split = Rat::zero();
        for t in 0..p {
            let d = (t * t + 4 * p - 4) % p;
            if d != 0 && is_square_mod_p(p, d) {
                unit_split += src.mass(&ball(Rat::from_integer(t.into()), 1)?)?;
            }
        }
        let two = Rat::from_integer(2.into());
        let mut near = Vec::new();
        for j in 1..=levels as i64 {
            // t = ±2 + p^{2j} s: t^2 - 4 has square class of ±s.
            let mut balls = Vec::new();
            for s in 1..p {
                let off = Rat::from_integer(s.into()) * p_pow(p, 2 * j);
                if is_square_mod_p(p, s) {
                    balls.push(ball(&two + &off, 2 * j + 1)?);
                }
                if is_square_mod_p(p, p - s) {
                    balls.push(ball(-&two + &off, 2 * j + 1)?);
                }
            }
            let ms = balls.par_iter().map(|b| src.mass(b)).collect::<Result<Vec<_>>>()?;
            near.push(ms.into_iter().fold(Rat::zero(), |a, b| a + b));
        }
        let germ = fit_germ(p, &near)?;
        Ok(SplitProfile { p, shells, unit_split, near, germ })
    }

    /// `∫ κ(t) dμ` with `κ = (χ(a) + χ(a)^{-1}) / |a - a^{-1}|`, before calibration.
    pub fn raw_pairing(&self, z: &RatFunc) -> Result<RatFunc> {
        let p = self.p;
        let mut acc = RatFunc::constant(Rat::from_integer(2.into()) * &self.unit_split);
        for (i, m) in self.shells.iter().enumerate() {
            let k = i as i64 + 1;
            let ker = z.pow(k).add(&z.pow(-k)).mul(&RatFunc::constant(p_pow(p, -k)));
            acc = acc.add(&ker.mul(&RatFunc::constant(m.clone())));
        }
        let two = Rat::from_integer(2.into());
        let mut inner = Rat::zero();
        for (i, m) in self.near.iter().enumerate() {
            inner += &two * p_pow(p, i as i64 + 1) * m;
        }
        // Σ_{j > J} 2 q^{-j} (α + β q^{-j})
        let jn = self.near.len() as i64 + 1;
        let one = Rat::one();
        let g = &self.germ;
        inner += &two * &g.alpha * p_pow(p, -jn) / (&one - p_pow(p, -1));
        inner += &two * &g.beta * p_pow(p, -2 * jn) / (&one - p_pow(p, -2));
        Ok(acc.add(&RatFunc::constant(inner)))
    }
}

// α + β q^{-j} = q^{2j} M_{2j} on the last three levels.
fn fit_germ(p: u64, near: &[Rat]) -> Result<SingularGerm> {
    let n = near.len();
    let y = |j: usize| p_pow(p, 2 * j as i64) * &near[j - 1];
    let (j1, j2, j3) = (n - 2, n - 1, n);
    let (x1, x2) = (p_pow(p, -(j1 as i64)), p_pow(p, -(j2 as i64)));
    let beta = (y(j1) - y(j2)) / (&x1 - &x2);
    let alpha = y(j1) - &beta * &x1;
    if &alpha + &beta * p_pow(p, -(j3 as i64)) != y(j3) {
        return Err(PtwError::PrecisionExhausted(format!("split germ at ±2 not stable through level {}", 2 * j3 + 1)));
    }
    Ok(SingularGerm { alpha, beta, from: j1 as i64 })
}

/// The pairing normalized by `⟨trace pushforward of 1_K dg, Θ_χ⟩ = 1`.
#[derive(Clone, Debug)]
pub struct StablePairingKernel {
    pub p: u64,
    pub levels: u32,
    pub norm: Rat,
}

impl StablePairingKernel {
    /// Calibrates against the enumeration oracle for `1_K dg`.
    pub fn calibrate(p: u64, levels: u32) -> Result<Self> {
        let src = HeckeTrace::new(p, 0, 2 * levels as i64 + 1, Rat::one())?;
        let raw = SplitProfile::measure(&src, 0, levels)?.raw_pairing(&RatFunc::z())?;
        let norm = raw.constant_value().ok_or_else(|| PtwError::Invalid("calibration depends on z".into()))?;
        if norm.is_zero() {
            return Err(PtwError::Invalid("calibration constant vanishes".into()));
        }
        Ok(StablePairingKernel { p, levels, norm })
    }

    /// `κ(t)` at the split class `t = a + 1/a`, as a function of `z = χ(ϖ)`.
    pub fn kernel_at(&self, a: &Rat) -> Result<RatFunc> {
        let v = val_rat(self.p, a).ok_or(PtwError::ZeroInput)?;
        let d = a - a.recip();
        let dv = val_rat(self.p, &d).ok_or_else(|| PtwError::DegenerateParameter("a = ±1 is not regular".into()))?;
        let z = RatFunc::z();
        Ok(z.pow(v).add(&z.pow(-v)).mul(&RatFunc::constant(p_pow(self.p, dv) / &self.norm)))
    }

    pub fn pair(&self, src: &dyn TraceMassSource, chi: &MultChar, depth: u32) -> Result<RatFunc> {
        if !chi.is_unramified() {
            return Err(PtwError::Invalid("the stable pairing takes unramified characters".into()));
        }
        let raw = SplitProfile::measure(src, depth, self.levels)?.raw_pairing(&RatFunc::z())?;
        let out = raw.mul(&RatFunc::constant(self.norm.recip()));
        let z = chi.z_as::<RatFunc>()?;
        if z == RatFunc::z() {
            Ok(out)
        } else {
            out.compose(Var::Z, &z)
        }
    }
}

/// `stable_pairing(𝓣f, χ)` for an SL2 Hecke-family vector supported in depth `depth`.
pub fn stable_pairing_of_transfer(kernel: &StablePairingKernel, f: &KuznetsovVector<RatFunc>, chi: &MultChar) -> Result<RatFunc> {
    let depth = f.hecke.degree().max(0) as u32;
    kernel.pair(&Transferred::new(f, kernel.p)?, chi, depth)
}

/// Checks that `𝓣f` has no mass on the shells `|t| = q^k`, `depth < k <= depth + extra`,
/// and is locally constant at level 1 around the regular point `t0 ∈ O` (`t0^2 - 4` a unit).
pub fn image_regular(src: &dyn TraceMassSource, depth: u32, extra: u32, t0: i64) -> Result<bool> {
    let p = src.prime();
    let zero = Rat::zero();
    let mut prev = src.mass(&Ball::new(p, &zero, -(depth as i64))?)?;
    for k in depth as i64 + 1..=(depth + extra) as i64 {
        let cur = src.mass(&Ball::new(p, &zero, -k)?)?;
        if cur != prev {
            return Ok(false);
        }
        prev = cur;
    }
    let t = Rat::from_integer(t0.into());
    if ((t0 * t0 - 4).rem_euclid(p as i64)) == 0 {
        return Err(PtwError::Invalid(format!("{t0} is not a regular point")));
    }
    let m1 = src.mass(&Ball::new(p, &t, 1)?)?;
    for n in 2..=3 {
        if src.mass(&Ball::new(p, &t, n)?)? != &m1 * p_pow(p, 1 - n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `𝓕_{Id,1} ∘ 𝓕_{Id,1}` on the spectral side: Mellin data times `γ(χ, 0, ψ)^2`.
pub fn transfer_kuznetsov_to_torus_spectral<C: PoleField>(f: &ExtendedMeasure<C>) -> Result<MellinData<C>> {
    let p = f.p();
    let kern = ConvolutionKernel::d1(p, C::SYMBOLIC);
    mellin(f)?.map(|eta, r| {
        let g = kern.multiplier(eta)?;
        r.mul(&g)?.mul(&g)
    })
}

pub type Mat2 = [[Rat; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0].clone(), a[1][0].clone()], [a[0][1].clone(), a[1][1].clone()]]
}

fn weyl() -> (Mat2, Mat2) {
    let (o, z) = (Rat::one(), Rat::zero());
    ([[z.clone(), o.clone()], [-o.clone(), z.clone()]], [[z.clone(), -o.clone()], [o, z]])
}

/// `𝓒(g1, g2) = tr(g1 w g2^t w^{-1})`.
pub fn family_coordinate(g1: &Mat2, g2: &Mat2) -> Rat {
    let (w, wi) = weyl();
    let m = mat_mul(&mat_mul(g1, &w), &mat_mul(&transpose(g2), &wi));
    &m[0][0] + &m[1][1]
}

#[derive(Clone, Debug, Default)]
pub struct FamilyReport {
    pub samples: usize,
    pub failures: Vec<String>,
}

impl FamilyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// On each `(g1, g2)` with `det g2 = 1`: `g2^{-1} = w g2^t w^{-1}` and `𝓒(g1, g2) = tr(g1 g2^{-1})`.
/// Also checks `𝓒(E11, E22) = 1` and `𝓒(0, g) = 0`.
pub fn family_coordinate_check(samples: &[(Mat2, Mat2)]) -> FamilyReport {
    let mut rep = FamilyReport::default();
    let (w, wi) = weyl();
    for (i, (g1, g2)) in samples.iter().enumerate() {
        rep.samples += 1;
        let det = &g2[0][0] * &g2[1][1] - &g2[0][1] * &g2[1][0];
        if !det.is_one() {
            rep.failures.push(format!("sample {i}: det g2 = {det}"));
            continue;
        }
        let inv: Mat2 = [[g2[1][1].clone(), -g2[0][1].clone()], [-g2[1][0].clone(), g2[0][0].clone()]];
        if mat_mul(&mat_mul(&w, &transpose(g2)), &wi) != inv {
            rep.failures.push(format!("sample {i}: w g2^t w^-1 != g2^-1"));
        }
        let prod = mat_mul(g1, &inv);
        if family_coordinate(g1, g2) != &prod[0][0] + &prod[1][1] {
            rep.failures.push(format!("sample {i}: coordinate != tr(g1 g2^-1)"));
        }
    }
    let (o, z) = (Rat::one(), Rat::zero());
    let e11: Mat2 = [[o.clone(), z.clone()], [z.clone(), z.clone()]];
    let e22: Mat2 = [[z.clone(), z.clone()], [z.clone(), o.clone()]];
    if family_coordinate(&e11, &e22) != o {
        rep.failures.push("rank-one pair does not map to 1".into());
    }
    let zero: Mat2 = [[z.clone(), z.clone()], [z.clone(), z.clone()]];
    if !family_coordinate(&zero, &e11).is_zero() {
        rep.failures.push("zero matrix does not map to 0".into());
    }
    rep
}
