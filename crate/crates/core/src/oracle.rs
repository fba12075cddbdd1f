//! Brute-force ground truth over finite rings `Z/p^k`.
//!
//! Everything here is computed by enumeration and checked at two mesh levels;
//! the closed forms elsewhere in the crate are tested against these values.

use std::collections::BTreeMap;

use num::{BigInt, One, Zero};
use rayon::prelude::*;

use crate::arith::{p_pow, padic_frac, rat, val_rat, Coeff, Cyclo, Rat, RatFunc};
use crate::error::{PtwError, Result};
use crate::field::{pz, Ball};

/// Counts of `(b, c) mod p^k` with `bc = N`, in total and with `(b, c)` not both divisible by `p`.
#[derive(Clone, Debug)]
pub struct FiniteGroupTable {
    pub p: u64,
    pub k: u32,
    modulus: u64,
    bc_all: Vec<u64>,
    bc_prim: Vec<u64>,
}

/// Largest `p^{2k}` the tables will enumerate.
pub const ENUMERATION_LIMIT: u64 = 100_000_000;

impl FiniteGroupTable {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        let m = pz(p, k);
        if m.saturating_mul(m) > ENUMERATION_LIMIT {
            return Err(PtwError::PrecisionExhausted(format!("p^{k} too large to enumerate")));
        }
        let (bc_all, bc_prim) = (0..m)
            .into_par_iter()
            .fold(
                || (vec![0u64; m as usize], vec![0u64; m as usize]),
                |(mut all, mut prim), b| {
                    for c in 0..m {
                        let n = ((b as u128 * c as u128) % m as u128) as usize;
                        all[n] += 1;
                        if b % p != 0 || c % p != 0 {
                            prim[n] += 1;
                        }
                    }
                    (all, prim)
                },
            )
            .reduce(|| (vec![0u64; m as usize], vec![0u64; m as usize]), |a, b| (add_vec(a.0, &b.0), add_vec(a.1, &b.1)));
        Ok(FiniteGroupTable { p, k, modulus: m, bc_all, bc_prim })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Histogram of `tr M mod p^k` over primitive `M mod p^k` with `det M = d`.
    pub fn trace_histogram(&self, det: u64) -> Vec<u64> {
        let (m, p) = (self.modulus, self.p);
        let det = det % m;
        (0..m)
            .into_par_iter()
            .fold(
                || vec![0u64; m as usize],
                |mut h, a| {
                    for d in 0..m {
                        let n = ((a as u128 * d as u128 + m as u128 - det as u128) % m as u128) as usize;
                        let cnt = if a % p != 0 || d % p != 0 { self.bc_all[n] } else { self.bc_prim[n] };
                        h[((a + d) % m) as usize] += cnt;
                    }
                    h
                },
            )
            .reduce(|| vec![0u64; m as usize], |a, b| add_vec(a, &b))
    }

    /// `|SL2(Z/p^k)|`, asserted against `p^{3k}(1 - p^{-2})`.
    pub fn sl2_order(&self) -> Result<u64> {
        let n: u64 = self.trace_histogram(1).iter().sum();
        let expect = pz(self.p, 3 * self.k) - pz(self.p, 3 * self.k - 2);
        if n != expect {
            return Err(PtwError::Invalid(format!("group order {n} != {expect}")));
        }
        Ok(n)
    }
}

fn add_vec(mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Sum of `hist[t]` over `t mod p^k` in the ball (`None` if the ball is finer than `p^k`).
fn ball_count(p: u64, k: u32, hist: &[u64], ball: &Ball) -> Option<u64> {
    let n = ball.level();
    let c = ball.center();
    if n <= 0 {
        // Either contains Z_p or misses it.
        return Some(if c.is_zero() || val_rat(p, c).unwrap() >= 0 { hist.iter().sum() } else { 0 });
    }
    if n > k as i64 {
        return None;
    }
    if val_rat(p, c).map(|v| v < 0).unwrap_or(false) {
        return Some(0);
    }
    let step = pz(p, n as u32);
    let c0 = crate::arith::residue_mod(c, step);
    Some((0..hist.len() as u64).filter(|t| t % step == c0).map(|t| hist[t as usize]).sum())
}

/// `#{g in SL2(Z/p^k) : tr g in ball} / |SL2(Z/p^k)|`.
pub fn trace_fiber_count(ball: &Ball, p: u64, k: u32) -> Result<Rat> {
    let t = FiniteGroupTable::new(p, k)?;
    let hist = t.trace_histogram(1);
    let order = t.sl2_order()?;
    let c = ball_count(p, k, &hist, ball).ok_or_else(|| PtwError::InsufficientPrecision(format!("ball level {} > {k}", ball.level())))?;
    Ok(rat(c as i64, order as i64))
}

/// Trace pushforward of `1_{K t_m K} dg` (`dg(K) = 1`; `m = 0` is `1_K`), from primitive
/// integer matrices of determinant `p^{2m}` counted modulo `p^L` at two levels `L`.
#[derive(Clone, Debug)]
pub struct TraceOracle {
    pub p: u64,
    pub m: u32,
    levels: [u32; 2],
    hists: [Vec<u64>; 2],
}

impl TraceOracle {
    /// Tables fine enough for balls of level up to `max_level`.
    pub fn new(p: u64, m: u32, max_level: i64) -> Result<Self> {
        let base = ((max_level + m as i64).max(1) as u32).max(2 * m + 1);
        let mk = |l: u32| -> Result<Vec<u64>> {
            let t = FiniteGroupTable::new(p, l)?;
            if m == 0 {
                t.sl2_order()?;
            }
            Ok(t.trace_histogram(pz(p, 2 * m)))
        };
        Ok(TraceOracle { p, m, levels: [base, base + 1], hists: [mk(base)?, mk(base + 1)?] })
    }

    /// Exact mass of a ball; the two enumeration levels must agree.
    pub fn mass(&self, ball: &Ball) -> Result<Rat> {
        let (p, m) = (self.p, self.m);
        // tr(p^{-m} M) lies in the ball iff tr M lies in p^m * ball.
        let scaled = Ball::new(p, &(ball.center() * p_pow(p, m as i64)), ball.level() + m as i64)?;
        let z2 = Rat::one() / (Rat::one() - p_pow(p, -2));
        let mut vals = Vec::with_capacity(2);
        for (l, h) in self.levels.iter().zip(&self.hists) {
            let c = ball_count(p, *l, h, &scaled).ok_or_else(|| PtwError::InsufficientPrecision(format!("ball {ball} finer than the tables")))?;
            vals.push(&z2 * p_pow(p, 2 * m as i64 - 3 * *l as i64) * Rat::from_integer(BigInt::from(c)));
        }
        if vals[0] != vals[1] {
            return Err(PtwError::PrecisionExhausted(format!("trace mass unstable for {ball}")));
        }
        Ok(vals.swap_remove(0))
    }
}

/// Trace pushforward of `1_{K t_m K} dg` on one ball.
pub fn hecke_trace_mass(p: u64, m: u32, ball: &Ball) -> Result<Rat> {
    TraceOracle::new(p, m, ball.level())?.mass(ball)
}

/// Sums `Σ_i ζ^{a_i}` for rational phases `a_i mod 1` with p-power denominators, exactly.
pub fn phase_sum(p: u64, phases: impl IntoIterator<Item = Rat>, scale: &Rat) -> Cyclo {
    let mut counts: BTreeMap<Rat, i64> = BTreeMap::new();
    let mut k = 0u32;
    for a in phases {
        let f = padic_frac(p, &a);
        if !f.is_zero() {
            k = k.max(-val_rat(p, &f).unwrap() as u32);
        }
        *counts.entry(f).or_insert(0) += 1;
    }
    let n = pz(p, k);
    let mut hist = vec![0i64; n as usize];
    for (f, c) in counts {
        let idx = (f * Rat::from_integer(BigInt::from(n))).to_integer();
        let i: u64 = idx.try_into().expect("phase index");
        hist[i as usize] += c;
    }
    Cyclo::from_hist(p, k, &hist, scale)
}

/// The Kloosterman sum `S(a, b; p^k) = Σ_{x unit} psi((a x + b x^{-1}) / p^k)`.
pub fn kloosterman(p: u64, k: u32, a: i64, b: i64) -> Cyclo {
    let m = pz(p, k);
    let mut hist = vec![0i64; m as usize];
    let (a, b) = (a.rem_euclid(m as i64) as u64, b.rem_euclid(m as i64) as u64);
    for x in (1..m).filter(|x| x % p != 0) {
        let xi = crate::arith::modinv_u64(x, m).unwrap();
        let e = (crate::chars::mulmod(a, x, m) + crate::chars::mulmod(b, xi, m)) % m;
        hist[e as usize] += 1;
    }
    Cyclo::from_hist(p, k, &hist, &Rat::one())
}

/// The left (N, psi)-equivariant function supported on `N t_m K`, `t_m = diag(p^m, p^{-m})`,
/// equal to `q^{-m}` at `t_m`; returns `(q^{-m}, x)` with value `q^{-m} psi(x)`.
pub fn whittaker_sl2(p: u64, m: u32, g: &[[Rat; 2]; 2]) -> Option<(Rat, Rat)> {
    let [[a, b], [c, d]] = g;
    let vc = val_rat(p, c).unwrap_or(i64::MAX);
    let vd = val_rat(p, d).unwrap_or(i64::MAX);
    if vc.min(vd) != -(m as i64) {
        return None;
    }
    let x = if vd == -(m as i64) { b / d } else { a / c };
    Some((p_pow(p, -(m as i64)), x))
}

/// `∫_N W_m(w e^{α̌}(ζ) n_y) psi^{-1}(y) dy` on the mesh `p^{-R} Z_p / p^L`.
fn orbital_at_mesh(p: u64, m: u32, zeta: &Rat, l: u32) -> Result<Cyclo> {
    let a = -val_rat(p, zeta).ok_or(PtwError::ZeroInput)?;
    if a > m as i64 {
        return Ok(Cyclo::zero());
    }
    let r = (m as i64 - a) as u32;
    let cells = pz(p, r + l);
    let zi = Rat::one() / zeta;
    let mut phases = Vec::new();
    let mut weight = None;
    for j in 0..cells {
        let y = Rat::new(BigInt::from(j), BigInt::from(pz(p, r)));
        let g = [[Rat::zero(), -zi.clone()], [zeta.clone(), zeta * &y]];
        if let Some((w, x)) = whittaker_sl2(p, m, &g) {
            weight = Some(w);
            phases.push(x - &y);
        }
    }
    let Some(w) = weight else { return Ok(Cyclo::zero()) };
    Ok(phase_sum(p, phases, &(w * p_pow(p, -(l as i64)))))
}

/// Kuznetsov orbital integral of the `e^{-m α̌}` Whittaker function at `ζ`, exact.
///
/// The enumeration mesh is refined until two consecutive levels agree.
pub fn kloosterman_orbital(p: u64, m: u32, zeta: &Rat, max_level: u32) -> Result<Cyclo> {
    let mut prev = orbital_at_mesh(p, m, zeta, 0)?;
    for l in 1..=max_level {
        let next = orbital_at_mesh(p, m, zeta, l)?;
        if next == prev {
            return Ok(next);
        }
        prev = next;
    }
    Err(PtwError::PrecisionExhausted(format!("orbital integral at {zeta} did not stabilize")))
}

/// Density of the twisted pushforward of `e^{-m α̌}` w.r.t. `d^x ζ`:
/// `(1 - q^{-2})^{-1} O(ζ) |ζ|^2`, by enumeration.
pub fn pushforward_density_oracle(p: u64, m: u32, zeta: &Rat) -> Result<Cyclo> {
    let o = kloosterman_orbital(p, m, zeta, 2 * m + 2)?;
    let v = val_rat(p, zeta).ok_or(PtwError::ZeroInput)?;
    let z2 = Rat::one() / (Rat::one() - p_pow(p, -2));
    Ok(o.mul(&Cyclo::rational(z2 * p_pow(p, -2 * v))))
}

/// Exact integral of a locally constant function supported in `p^{-radius} Z_p`,
/// summed over cells of `p^level Z_p` and checked one level finer.
pub fn riemann_sum<C: Coeff>(p: u64, radius: i64, level: i64, f: impl Fn(&Rat) -> Result<C> + Sync) -> Result<C>
where
    C: Send,
{
    let at = |l: i64| -> Result<C> {
        let cells = pz(p, (radius + l) as u32);
        let vol = C::q_pow(p, -l);
        let parts: Result<Vec<C>> = (0..cells).into_par_iter().map(|j| f(&(Rat::from_integer(BigInt::from(j)) * p_pow(p, -radius)))).collect();
        Ok(crate::arith::sum(parts?).mul(&vol))
    };
    let a = at(level)?;
    let b = at(level + 1)?;
    if a.deviation(&b) > 1e-10 {
        return Err(PtwError::NotLocallyConstant(level as u32));
    }
    Ok(a)
}

/// Satake transform of `1_{K t_m K}` from its left `K`-cosets
/// `p^{-m} [[p^a, b], [0, p^{2m-a}]]`, as a Laurent polynomial in `z` at `q = p`.
pub fn satake_oracle(p: u64, m: u32) -> RatFunc {
    let mut out = RatFunc::zero();
    for a in 0..=2 * m {
        let pa = pz(p, a);
        let other = pz(p, 2 * m - a);
        let count = (0..pa).filter(|&b| gcd(gcd(pa, b), other) == 1).count() as i64;
        let e = a as i64 - m as i64;
        let c = rat(count, 1) * p_pow(p, -e);
        out = out.add(&RatFunc::z().pow(e).scale(&c));
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `<π(n_y) φ_K, φ_K>` for `v(y) = v`, as the average of `(z/q)^{-min(v(c), v(c y + d))}`
/// over primitive `(c, d)`, at `q = p`.
pub fn spherical_oracle(p: u64, v: i64) -> Result<RatFunc> {
    if v >= 0 {
        return Ok(RatFunc::one());
    }
    let m = (-v) as u32;
    let y = p_pow(p, v);
    let at = |l: u32| -> RatFunc {
        let n = pz(p, l);
        let mut hist: BTreeMap<i64, i64> = BTreeMap::new();
        let mut total = 0i64;
        for c in 0..n {
            for d in 0..n {
                if c % p == 0 && d % p == 0 {
                    continue;
                }
                total += 1;
                let (cr, dr) = (rat(c as i64, 1), rat(d as i64, 1));
                let e1 = val_rat(p, &cr).unwrap_or(l as i64).min(l as i64);
                let e2 = val_rat(p, &(&cr * &y + &dr)).unwrap_or(l as i64).min(l as i64);
                *hist.entry(e1.min(e2)).or_insert(0) += 1;
            }
        }
        let zq = RatFunc::z().scale(&p_pow(p, -1));
        let mut out = RatFunc::zero();
        for (e, c) in hist {
            out = out.add(&zq.pow(-e).scale(&rat(c, total)));
        }
        out
    };
    let a = at(m + 1);
    if a != at(m + 2) {
        return Err(PtwError::PrecisionExhausted("spherical oracle unstable".into()));
    }
    Ok(a)
}

/// The left (N, psi)-equivariant function on PGL2 supported on `Z N diag(p^m, 1) K`,
/// equal to 1 at `diag(p^m, 1)`; returns the phase `x` with value `psi(x)`.
pub fn whittaker_pgl2(p: u64, m: u32, g: &[[Rat; 2]; 2]) -> Option<Rat> {
    let [[a, b], [c, d]] = g;
    let vc = val_rat(p, c).unwrap_or(i64::MAX);
    let vd = val_rat(p, d).unwrap_or(i64::MAX);
    let e = vc.min(vd);
    let det = a * d - b * c;
    if val_rat(p, &det)? - 2 * e != m as i64 {
        return None;
    }
    // Rescale to a primitive bottom row; the phase is invariant under the center.
    Some(if vd == e { b / d } else { a / c })
}

fn pgl2_orbital_at_mesh(p: u64, m: u32, xi: &Rat, l: u32) -> Result<Cyclo> {
    let v = val_rat(p, xi).ok_or(PtwError::ZeroInput)?;
    if v < -(m as i64) || (v + m as i64) % 2 != 0 {
        return Ok(Cyclo::zero());
    }
    // The support forces v(y) >= -(v + m) / 2.
    let r = ((v + m as i64) / 2) as u32;
    let cells = pz(p, r + l);
    let mut phases = Vec::new();
    for j in 0..cells {
        let y = Rat::new(BigInt::from(j), BigInt::from(pz(p, r)));
        let g = [[Rat::zero(), -Rat::one()], [xi.clone(), xi * &y]];
        if let Some(x) = whittaker_pgl2(p, m, &g) {
            phases.push(x - &y);
        }
    }
    Ok(phase_sum(p, phases, &p_pow(p, -(l as i64))))
}

/// PGL2 Kuznetsov orbital integral `∫ W_m(w e^{α̌/2}(ξ) n_y) psi^{-1}(y) dy`, refined until stable.
pub fn pgl2_orbital(p: u64, m: u32, xi: &Rat, max_level: u32) -> Result<Cyclo> {
    let mut prev = pgl2_orbital_at_mesh(p, m, xi, 0)?;
    for l in 1..=max_level {
        let next = pgl2_orbital_at_mesh(p, m, xi, l)?;
        if next == prev {
            return Ok(next);
        }
        prev = next;
    }
    Err(PtwError::PrecisionExhausted(format!("PGL2 orbital integral at {xi} did not stabilize")))
}

/// Density of the PGL2 twisted pushforward w.r.t. `d^x ξ`: `(1 - q^{-1})^{-1} O(ξ) |ξ|`.
pub fn pgl2_density_oracle(p: u64, m: u32, xi: &Rat) -> Result<Cyclo> {
    let v = val_rat(p, xi).ok_or(PtwError::ZeroInput)?;
    let o = pgl2_orbital(p, m, xi, (v.unsigned_abs() as u32) + m + 2)?;
    let z1 = Rat::one() / (Rat::one() - p_pow(p, -1));
    Ok(o.mul(&Cyclo::rational(z1 * p_pow(p, -v))))
}

/// Whittaker coefficients of `W * 1_{K t_m K}` from those of a spherical SL2 Whittaker
/// function, by summing over the left cosets of the double coset.
///
/// `beta[n]` is the coefficient of the `e^{-n α̌}` basis function (value `q^{-n}` at `t_n`);
/// the result covers `n < beta.len() - 2m`, as exact values in `Q(ζ_{p^∞})`.
pub fn hecke_whittaker_oracle(p: u64, m: u32, beta: &[Rat]) -> Vec<Cyclo> {
    let n_out = beta.len().saturating_sub(2 * m as usize);
    let mut out = Vec::with_capacity(n_out);
    for n in 0..n_out as i64 {
        let mut acc = Cyclo::zero();
        for a in 0..=2 * m {
            let idx = n + a as i64 - m as i64;
            if idx < 0 || beta[idx as usize].is_zero() {
                continue;
            }
            let pa = pz(p, a);
            let other = pz(p, 2 * m - a);
            // t_n γ has bottom row (0, p^{-idx}) and phase b p^{2n - 2m + a}.
            let scale = p_pow(p, 2 * n - 2 * m as i64 + a as i64);
            let phases: Vec<Rat> = (0..pa).filter(|&b| gcd(gcd(pa, b), other) == 1).map(|b| rat(b as i64, 1) * &scale).collect();
            let w = &beta[idx as usize] * p_pow(p, n - idx);
            acc = acc.add(&phase_sum(p, phases, &w));
        }
        out.push(acc);
    }
    out
}
