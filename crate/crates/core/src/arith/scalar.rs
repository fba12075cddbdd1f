//! The two-regime scalar: exact rational functions or complex floats.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NumC, Rat, RatFunc, Var};
use crate::error::{PtwError, Result};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum Scalar {
    Symbolic(RatFunc),
    Numeric(NumC),
}

/// A value bound to an indeterminate during evaluation.
#[derive(Clone, Debug)]
pub enum Binding {
    Exact(Rat),
    Float(NumC),
}

impl Scalar {
    pub fn is_symbolic(&self) -> bool {
        matches!(self, Scalar::Symbolic(_))
    }

    pub fn as_ratfunc(&self) -> Result<&RatFunc> {
        match self {
            Scalar::Symbolic(r) => Ok(r),
            Scalar::Numeric(_) => Err(PtwError::RegimeMismatch),
        }
    }

    pub fn as_numc(&self) -> Result<NumC> {
        match self {
            Scalar::Numeric(c) => Ok(*c),
            Scalar::Symbolic(_) => Err(PtwError::RegimeMismatch),
        }
    }

    fn zip(&self, o: &Scalar, f: impl Fn(&RatFunc, &RatFunc) -> Result<RatFunc>, g: impl Fn(NumC, NumC) -> NumC) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Symbolic(a), Scalar::Symbolic(b)) => Ok(Scalar::Symbolic(f(a, b)?)),
            (Scalar::Numeric(a), Scalar::Numeric(b)) => Ok(Scalar::Numeric(g(*a, *b).checked()?)),
            _ => Err(PtwError::RegimeMismatch),
        }
    }

    pub fn add(&self, o: &Scalar) -> Result<Scalar> {
        self.zip(o, |a, b| Ok(a.add(b)), |a, b| a + b)
    }

    pub fn sub(&self, o: &Scalar) -> Result<Scalar> {
        self.zip(o, |a, b| Ok(a.sub(b)), |a, b| a - b)
    }

    pub fn mul(&self, o: &Scalar) -> Result<Scalar> {
        self.zip(o, |a, b| Ok(a.mul(b)), |a, b| a * b)
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        if let Scalar::Numeric(b) = o {
            if b.abs() == 0.0 {
                return Err(PtwError::ZeroDenominator);
            }
        }
        self.zip(o, |a, b| a.div(b), |a, b| a / b)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Symbolic(r) => write!(f, "{r}"),
            Scalar::Numeric(c) => write!(f, "{c}"),
        }
    }
}

/// Evaluates a rational function; exact when every binding is rational.
pub fn rf_evaluate(f: &RatFunc, bindings: &BTreeMap<Var, Binding>) -> Result<Scalar> {
    for v in f.vars() {
        if !bindings.contains_key(&v) {
            return Err(PtwError::UnboundVariable(v.name().into()));
        }
    }
    let all_exact = f.vars().iter().all(|v| matches!(bindings[v], Binding::Exact(_)));
    if all_exact {
        let vals: BTreeMap<Var, Rat> = bindings
            .iter()
            .filter_map(|(v, b)| match b {
                Binding::Exact(r) => Some((*v, r.clone())),
                _ => None,
            })
            .collect();
        Ok(Scalar::Symbolic(RatFunc::constant(f.eval_rat(&vals)?)))
    } else {
        let vals: BTreeMap<Var, NumC> = bindings
            .iter()
            .map(|(v, b)| {
                (
                    *v,
                    match b {
                        Binding::Exact(r) => NumC::real(super::rat_to_f64(r)),
                        Binding::Float(c) => *c,
                    },
                )
            })
            .collect();
        Ok(Scalar::Numeric(f.eval_complex(&vals)?))
    }
}

/// Canonical representative; idempotent.
pub fn rf_normalize(f: &RatFunc) -> Result<RatFunc> {
    if f.denom().is_zero() {
        return Err(PtwError::ZeroDenominator);
    }
    Ok(f.normalize())
}
