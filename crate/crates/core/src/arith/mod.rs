//! Exact and floating scalar arithmetic.

pub mod cyclo;
pub mod numc;
pub mod poly;
pub mod ratfunc;
pub mod scalar;
pub mod series;
pub mod upoly;

use std::fmt::Debug;

use num::{BigInt, BigRational, One, Signed, Zero};

pub use cyclo::Cyclo;
pub use numc::NumC;
pub use poly::{Poly, Var};
pub use ratfunc::RatFunc;
pub use scalar::Scalar;
pub use upoly::UPoly;

use crate::error::{PtwError, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || PtwError::Invalid(format!("not a rational: {s}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(PtwError::ZeroDenominator);
            }
            Ok(Rat::new(a, b))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `q^e` for a concrete prime.
pub fn p_pow(p: u64, e: i64) -> Rat {
    let b = Rat::from_integer(BigInt::from(p));
    if e >= 0 {
        num::pow::pow(b, e as usize)
    } else {
        Rat::one() / num::pow::pow(b, (-e) as usize)
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators: scale through the shared bit length.
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n.max(d) - 60).max(0) as usize;
        let nn = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let dd = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        nn / dd
    })
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

/// Coefficient rings used by the measure and transform code.
///
/// `q_pow` and `psi` take the concrete prime; the symbolic implementation
/// ignores it and uses the indeterminate `q` instead.
pub trait Coeff: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rat(r: &Rat) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, r: &Rat) -> Self {
        self.mul(&Self::from_rat(r))
    }
    fn q_pow(p: u64, e: i64) -> Self;
    /// `exp(2 pi i x)` for rational `x`, taken mod 1.
    fn cis(p: u64, x: &Rat) -> Result<Self>;
    /// The additive character `psi(x) = exp(2 pi i {x}_p)`.
    fn psi(p: u64, x: &Rat) -> Result<Self> {
        Self::cis(p, &padic_frac(p, x))
    }
    fn to_numc(&self, p: u64) -> Result<NumC>;
    /// Converts a tagged scalar into this ring, failing on a regime mismatch.
    fn from_scalar(p: u64, s: &Scalar) -> Result<Self>;
    fn from_int(n: i64) -> Self {
        Self::from_rat(&rint(n))
    }
    /// True for the exact symbolic ring, where ramified data cannot be carried.
    const SYMBOLIC: bool = false;
    /// Distance used by comparison reports: zero or infinity for exact rings.
    fn deviation(&self, o: &Self) -> f64 {
        if self == o {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Coefficient rings that are fields (needed for partial fractions).
pub trait Field: Coeff {
    fn inv(&self) -> Result<Self>;
    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }
    /// Exact zero test, or a tolerance-based one for floating fields.
    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

pub fn sum<C: Coeff, I: IntoIterator<Item = C>>(it: I) -> C {
    it.into_iter().fold(C::zero(), |a, b| a.add(&b))
}

/// Reduces `x` modulo 1 into `[0, 1)`.
pub fn frac_mod1(x: &Rat) -> Rat {
    let f = x - Rat::from_integer(x.floor().to_integer());
    if f.is_negative() {
        f + Rat::one()
    } else {
        f
    }
}

/// `p`-adic valuation of a nonzero integer.
pub fn val_int(p: u64, n: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    v
}

/// `p`-adic valuation of a nonzero rational.
pub fn val_rat(p: u64, x: &Rat) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(val_int(p, x.numer()) - val_int(p, x.denom()))
    }
}

/// The `p`-adic fractional part `{x}_p`, a rational `a/p^m` in `[0,1)`.
pub fn padic_frac(p: u64, x: &Rat) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let vd = val_int(p, x.denom());
    if vd == 0 {
        return Rat::zero();
    }
    let pm = num::pow::pow(BigInt::from(p), vd as usize);
    let b = x.denom() / &pm;
    let binv = modinv(&b, &pm).expect("coprime to p");
    let a = ((x.numer() * binv) % &pm + &pm) % &pm;
    Rat::new(a, pm)
}

/// Inverse modulo `m`, when it exists.
pub fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    use num::Integer;
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(((e.x % m) + m) % m)
}

pub fn modinv_u64(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (m as i128, (a % m) as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    if r != 1 {
        return None;
    }
    Some(((t % m as i128 + m as i128) % m as i128) as u64)
}

/// The residue of a `p`-integral rational modulo `m` (a power of `p`).
pub fn residue_mod(x: &Rat, m: u64) -> u64 {
    let mb = BigInt::from(m);
    let inv = modinv(&(x.denom() % &mb), &mb).expect("p-integral");
    let r = ((x.numer() % &mb + &mb) * inv) % &mb;
    use num::ToPrimitive;
    ((r + &mb) % &mb).to_u64().unwrap()
}
