//! Double-precision complex values.

use std::fmt;

use num::complex::Complex64;

use super::{frac_mod1, rat_to_f64, Coeff, Field, Rat};
use crate::error::{PtwError, Result};

#[derive(Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct NumC {
    pub re: f64,
    pub im: f64,
}

impl NumC {
    pub const ZERO: NumC = NumC { re: 0.0, im: 0.0 };
    pub const ONE: NumC = NumC { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        NumC { re, im }
    }

    pub fn real(re: f64) -> Self {
        NumC { re, im: 0.0 }
    }

    pub fn c(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn from_c(z: Complex64) -> Self {
        NumC { re: z.re, im: z.im }
    }

    pub fn cis(theta: f64) -> Self {
        NumC { re: theta.cos(), im: theta.sin() }
    }

    pub fn abs(self) -> f64 {
        self.c().norm()
    }

    pub fn conj(self) -> Self {
        NumC { re: self.re, im: -self.im }
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn dist(self, o: NumC) -> f64 {
        (self.c() - o.c()).norm()
    }

    pub fn powi(self, e: i64) -> Self {
        NumC::from_c(self.c().powi(e as i32))
    }

    /// Errors when the value is not finite.
    pub fn checked(self) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(PtwError::Invalid("non-finite complex value".into()))
        }
    }
}

impl fmt::Debug for NumC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.12}, {:.12})", self.re, self.im)
    }
}

impl fmt::Display for NumC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.im < 0.0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl std::ops::Add for NumC {
    type Output = NumC;
    fn add(self, o: NumC) -> NumC {
        NumC::new(self.re + o.re, self.im + o.im)
    }
}

impl std::ops::Sub for NumC {
    type Output = NumC;
    fn sub(self, o: NumC) -> NumC {
        NumC::new(self.re - o.re, self.im - o.im)
    }
}

impl std::ops::Mul for NumC {
    type Output = NumC;
    fn mul(self, o: NumC) -> NumC {
        NumC::from_c(self.c() * o.c())
    }
}

impl std::ops::Div for NumC {
    type Output = NumC;
    fn div(self, o: NumC) -> NumC {
        NumC::from_c(self.c() / o.c())
    }
}

impl std::ops::Neg for NumC {
    type Output = NumC;
    fn neg(self) -> NumC {
        NumC::new(-self.re, -self.im)
    }
}

impl std::ops::AddAssign for NumC {
    fn add_assign(&mut self, o: NumC) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl Coeff for NumC {
    fn zero() -> Self {
        NumC::ZERO
    }
    fn one() -> Self {
        NumC::ONE
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_rat(r: &Rat) -> Self {
        NumC::real(rat_to_f64(r))
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn q_pow(p: u64, e: i64) -> Self {
        NumC::real((p as f64).powi(e as i32))
    }
    fn cis(_p: u64, x: &Rat) -> Result<Self> {
        let f = frac_mod1(x);
        Ok(NumC::cis(2.0 * std::f64::consts::PI * rat_to_f64(&f)))
    }
    fn to_numc(&self, _p: u64) -> Result<NumC> {
        Ok(*self)
    }
    fn from_scalar(p: u64, s: &super::Scalar) -> Result<Self> {
        match s {
            super::Scalar::Numeric(c) => Ok(*c),
            super::Scalar::Symbolic(f) => f.to_numc(p),
        }
    }
    fn deviation(&self, o: &Self) -> f64 {
        self.dist(*o)
    }
}

impl Field for NumC {
    fn inv(&self) -> Result<Self> {
        if Coeff::is_zero(self) {
            return Err(PtwError::PoleHit);
        }
        Ok(NumC::ONE / *self)
    }
    fn near_zero(&self) -> bool {
        self.abs() < 1e-11
    }
}
