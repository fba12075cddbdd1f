//! The base field `Q_p`: valuations, the additive character, balls and unit cosets.

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{p_pow, padic_frac, parse_rat, residue_mod, val_rat, Coeff, NumC, Rat, RatFunc, Scalar};
use crate::error::{PtwError, Result};

/// Default number of coset levels an operation may refine to.
pub const DEFAULT_K_MAX: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Symbolic,
    Numeric,
}

/// Working context: the prime, the precision cap and the arithmetic regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicContext {
    pub p: u64,
    pub k_max: u32,
    pub regime: Regime,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl PAdicContext {
    pub fn new(p: u64, k_max: u32, regime: Regime) -> Result<Self> {
        if !is_prime(p) {
            return Err(PtwError::Invalid(format!("{p} is not prime")));
        }
        Ok(PAdicContext { p, k_max, regime })
    }

    pub fn numeric(p: u64) -> Result<Self> {
        Self::new(p, DEFAULT_K_MAX, Regime::Numeric)
    }

    pub fn symbolic(p: u64) -> Result<Self> {
        Self::new(p, DEFAULT_K_MAX, Regime::Symbolic)
    }

    /// The residue cardinality.
    pub fn q(&self) -> u64 {
        self.p
    }

    pub fn check_level(&self, n: i64) -> Result<()> {
        if n > self.k_max as i64 {
            return Err(PtwError::InsufficientPrecision(format!("level {n} exceeds k_max = {}", self.k_max)));
        }
        Ok(())
    }

    /// `q^e` in the context's regime.
    pub fn q_pow(&self, e: i64) -> Scalar {
        match self.regime {
            Regime::Symbolic => Scalar::Symbolic(RatFunc::q_pow(e)),
            Regime::Numeric => Scalar::Numeric(NumC::q_pow(self.p, e)),
        }
    }
}

/// `p`-adic valuation of a nonzero rational.
pub fn valuation(p: u64, x: &Rat) -> Result<i64> {
    val_rat(p, x).ok_or(PtwError::ZeroInput)
}

/// `p^e` as an integer, `e >= 0`.
pub fn pz(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("prime power overflow")
}

/// The additive character `psi(x) = exp(2 pi i {x}_p)`, trivial exactly on the integers.
pub fn psi_eval(ctx: &PAdicContext, x: &Rat) -> Result<Scalar> {
    match ctx.regime {
        Regime::Numeric => Ok(Scalar::Numeric(NumC::psi(ctx.p, x)?)),
        Regime::Symbolic => Ok(Scalar::Symbolic(RatFunc::psi(ctx.p, x)?)),
    }
}

/// The ball `center + p^level Z_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BallJson", into = "BallJson")]
pub struct Ball {
    p: u64,
    center: Rat,
    level: i64,
}

#[derive(Serialize, Deserialize)]
struct BallJson {
    p: u64,
    c: String,
    n: i64,
}

impl TryFrom<BallJson> for Ball {
    type Error = PtwError;
    fn try_from(j: BallJson) -> Result<Ball> {
        Ball::new(j.p, &parse_rat(&j.c)?, j.n)
    }
}

impl From<Ball> for BallJson {
    fn from(b: Ball) -> BallJson {
        BallJson { p: b.p, c: crate::arith::fmt_rat(&b.center), n: b.level }
    }
}

/// Canonical representative of `x mod p^n`: zero, or `a/p^m` with `0 < a < p^(n+m)`.
pub fn reduce_mod_ball(p: u64, x: &Rat, n: i64) -> Rat {
    let v = match val_rat(p, x) {
        None => return Rat::zero(),
        Some(v) => v,
    };
    if v >= n {
        return Rat::zero();
    }
    let m = (-v).max(0);
    let scaled = x * p_pow(p, m);
    let modulus = num::pow::pow(BigInt::from(p), (n + m) as usize);
    let r = residue_big(&scaled, &modulus);
    Rat::new(r, num::pow::pow(BigInt::from(p), m as usize))
}

fn residue_big(x: &Rat, m: &BigInt) -> BigInt {
    let inv = crate::arith::modinv(&(x.denom() % m), m).expect("p-integral");
    let r = (x.numer() % m + m) % m;
    (r * inv) % m
}

impl Ball {
    pub fn new(p: u64, center: &Rat, level: i64) -> Result<Ball> {
        if !is_prime(p) {
            return Err(PtwError::Invalid(format!("{p} is not prime")));
        }
        // Any rational is a p-adic number; the canonical center has a p-power denominator.
        Ok(Ball { p, center: reduce_mod_ball(p, center, level), level })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn center(&self) -> &Rat {
        &self.center
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn contains(&self, x: &Rat) -> bool {
        let d = x - &self.center;
        match val_rat(self.p, &d) {
            None => true,
            Some(v) => v >= self.level,
        }
    }

    pub fn contains_ball(&self, b: &Ball) -> bool {
        b.level >= self.level && self.contains(&b.center)
    }

    pub fn disjoint(&self, b: &Ball) -> bool {
        !self.contains_ball(b) && !b.contains_ball(self)
    }

    /// Valuation of the points when the ball avoids zero.
    pub fn shell(&self) -> Option<i64> {
        if self.center.is_zero() {
            None
        } else {
            val_rat(self.p, &self.center)
        }
    }

    pub fn children(&self) -> Vec<Ball> {
        let step = p_pow(self.p, self.level);
        (0..self.p).map(|i| Ball::new(self.p, &(&self.center + &step * Rat::from_integer(BigInt::from(i))), self.level + 1).unwrap()).collect()
    }

    /// All balls of level `n >= self.level` inside this one.
    pub fn refine(&self, n: i64) -> Vec<Ball> {
        let mut out = vec![self.clone()];
        for _ in self.level..n {
            out = out.iter().flat_map(|b| b.children()).collect();
        }
        out
    }

    pub fn volume<C: Coeff>(&self) -> C {
        C::q_pow(self.p, -self.level)
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Ball {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.level, &self.center).cmp(&(o.level, &o.center))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+p^{}", crate::arith::fmt_rat(&self.center), self.level)
    }
}

/// The coset `p^v * u * (1 + p^n Z_p)`; level 0 is the whole shell `p^v Z_p^x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitCoset {
    pub v: i64,
    pub u: u64,
    pub n: u32,
}

impl UnitCoset {
    pub fn new(p: u64, v: i64, u: u64, n: u32) -> Result<UnitCoset> {
        if n == 0 {
            return Ok(UnitCoset { v, u: 1, n: 0 });
        }
        let m = pz(p, n);
        let u = u % m;
        if u % p == 0 {
            return Err(PtwError::Invalid(format!("{u} is not a unit mod {m}")));
        }
        Ok(UnitCoset { v, u, n })
    }

    pub fn shell(v: i64) -> UnitCoset {
        UnitCoset { v, u: 1, n: 0 }
    }

    /// The coset through a nonzero rational at level `n`.
    pub fn of(p: u64, x: &Rat, n: u32) -> Result<UnitCoset> {
        let v = valuation(p, x)?;
        if n == 0 {
            return Ok(UnitCoset::shell(v));
        }
        let unit = x / p_pow(p, v);
        Ok(UnitCoset { v, u: residue_mod(&unit, pz(p, n)), n })
    }

    /// A rational representative.
    pub fn rep(&self, p: u64) -> Rat {
        p_pow(p, self.v) * Rat::from_integer(BigInt::from(self.u))
    }

    pub fn contains(&self, p: u64, x: &Rat) -> bool {
        match UnitCoset::of(p, x, self.n) {
            Ok(c) => c == *self,
            Err(_) => false,
        }
    }

    pub fn contains_coset(&self, p: u64, c: &UnitCoset) -> bool {
        c.v == self.v && c.n >= self.n && (self.n == 0 || c.u % pz(p, self.n) == self.u)
    }

    /// Subcosets at level `n >= self.n`.
    pub fn refine(&self, p: u64, n: u32) -> Vec<UnitCoset> {
        assert!(n >= self.n);
        if n == 0 {
            return vec![*self];
        }
        let m = pz(p, n);
        let (base, step) = if self.n == 0 { (0, 1) } else { (self.u, pz(p, self.n)) };
        (0..m / step).map(|i| base + i * step).filter(|u| u % p != 0).map(|u| UnitCoset { v: self.v, u, n }).collect()
    }

    pub fn inverse(&self, p: u64) -> UnitCoset {
        if self.n == 0 {
            return UnitCoset::shell(-self.v);
        }
        let m = pz(p, self.n);
        UnitCoset { v: -self.v, u: crate::arith::modinv_u64(self.u, m).unwrap(), n: self.n }
    }

    /// Multiplicative `d^x`-volume.
    pub fn volume<C: Coeff>(&self, p: u64) -> C {
        if self.n == 0 {
            C::one().sub(&C::q_pow(p, -1))
        } else {
            C::q_pow(p, -(self.n as i64))
        }
    }
}

impl fmt::Display for UnitCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 0 {
            write!(f, "p^{}*O^x", self.v)
        } else {
            write!(f, "p^{}*{}(1+p^{})", self.v, self.u, self.n)
        }
    }
}

pub fn ball_volume(ctx: &PAdicContext, b: &Ball) -> Scalar {
    ctx.q_pow(-b.level)
}

pub fn unitcoset_volume(ctx: &PAdicContext, c: &UnitCoset) -> Scalar {
    match ctx.regime {
        Regime::Symbolic => Scalar::Symbolic(c.volume::<RatFunc>(ctx.p)),
        Regime::Numeric => Scalar::Numeric(c.volume::<NumC>(ctx.p)),
    }
}

/// Average volume of `F^x`: `(1 - 1/q) / log q`.
pub fn avg_volume(ctx: &PAdicContext) -> Result<NumC> {
    if ctx.regime != Regime::Numeric {
        return Err(PtwError::SymbolicRegime);
    }
    let q = ctx.p as f64;
    Ok(NumC::real((1.0 - 1.0 / q) / q.ln()))
}

/// The fractional part `{x}_p` as an `f64` in `[0,1)`.
pub fn frac_f64(p: u64, x: &Rat) -> f64 {
    crate::arith::rat_to_f64(&padic_frac(p, x))
}

/// Unit part residue of a nonzero rational modulo `p^n`.
pub fn unit_residue(p: u64, x: &Rat, n: u32) -> Result<u64> {
    let v = valuation(p, x)?;
    let u = x / p_pow(p, v);
    Ok(residue_mod(&u, pz(p, n)))
}
