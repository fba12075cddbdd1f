//! Laurent expansion of rational functions at zero or at infinity.

use serde::{Deserialize, Serialize};

use super::upoly::series_div;
use super::{Poly, RatFunc, UPoly, Var};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    AtZero,
    AtInfinity,
}

/// Splits `f` as a quotient of polynomials in `v` with coefficients free of `v`.
pub fn as_upoly(f: &RatFunc, v: Var) -> (UPoly<RatFunc>, UPoly<RatFunc>) {
    let conv = |p: &Poly| UPoly::new(p.coeffs_in(v).into_iter().map(RatFunc::from_poly).collect());
    (conv(f.numer()), conv(f.denom()))
}

/// Rebuilds a rational function from univariate data in `v`, times `v^shift`.
pub fn from_upoly(num: &UPoly<RatFunc>, den: &UPoly<RatFunc>, v: Var, shift: i64) -> Result<RatFunc> {
    let x = RatFunc::var(v);
    let ev = |p: &UPoly<RatFunc>| {
        let mut acc = RatFunc::zero();
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(&x).add(c);
        }
        acc
    };
    ev(num).div(&ev(den)).map(|r| r.mul(&RatFunc::var_pow(v, shift)))
}

/// The first `count` Laurent coefficients of `f` in `v`, as `(exponent, coefficient)`.
///
/// At zero the exponents increase from the order of `f` at `v = 0`; at
/// infinity they decrease from the degree of `f`.
pub fn rf_shell_expand(f: &RatFunc, v: Var, dir: Direction, count: usize) -> Result<Vec<(i64, RatFunc)>> {
    if f.is_zero() {
        return Ok(Vec::new());
    }
    let (n, d) = as_upoly(f, v);
    match dir {
        Direction::AtZero => {
            let ln = n.low_order().unwrap_or(0);
            let ld = d.low_order().unwrap_or(0);
            let s = series_div(&n.shr(ln), &d.shr(ld), count)?;
            let e0 = ln as i64 - ld as i64;
            Ok(s.into_iter().enumerate().map(|(k, c)| (e0 + k as i64, c)).collect())
        }
        Direction::AtInfinity => {
            let dn = n.degree().unwrap_or(0);
            let dd = d.degree().unwrap_or(0);
            let nr = n.reversed(dn);
            let dr = d.reversed(dd);
            let s = series_div(&nr, &dr, count)?;
            let e0 = dn as i64 - dd as i64;
            Ok(s.into_iter().enumerate().map(|(k, c)| (e0 - k as i64, c)).collect())
        }
    }
}
