//! Multiplicative Fourier convolutions `f -> (x^k)_*(chi(x)|x|^s psi(x) d^x x) * f`,
//! by a Mellin multiplier and by direct shell-by-shell integration.

use num::{BigInt, Zero};

use crate::arith::cyclo::root_sum;
use crate::arith::upoly::Pole;
use crate::arith::{p_pow, Coeff, Rat, Scalar, UPoly};
use crate::chars::{field_pow, gauss_sum_generic, MultChar, TameChar};
use crate::error::{PtwError, Result};
use crate::field::pz;
use crate::measures::{powmod, ExtendedMeasure, GmMeasure, ShellTable};
use crate::mellin::{mellin, power_sum_numerator, shell_psi_integral, MellinData, PoleField, ZRat};

/// The kernel `(x -> x^k)_* (chi(x) |x|^s psi(x) d^x x)`, with `qs = q^{-s}`.
#[derive(Clone, Debug)]
pub struct ConvolutionKernel {
    pub k: i64,
    pub chi: MultChar,
    pub qs: Scalar,
}

impl ConvolutionKernel {
    pub fn new(k: i64, chi: MultChar, qs: Scalar) -> Result<Self> {
        if k == 0 {
            return Err(PtwError::Invalid("kernel power must be nonzero".into()));
        }
        Ok(ConvolutionKernel { k, chi, qs })
    }

    /// The identity cocharacter with trivial twist at `s = 1`.
    pub fn d1(p: u64, symbolic: bool) -> Self {
        let (one, qs) = if symbolic {
            (Scalar::Symbolic(crate::arith::RatFunc::one()), Scalar::Symbolic(crate::arith::RatFunc::q_pow(-1)))
        } else {
            (Scalar::Numeric(crate::arith::NumC::ONE), Scalar::Numeric(crate::arith::NumC::real(1.0 / p as f64)))
        };
        ConvolutionKernel { k: 1, chi: MultChar::unramified(p, one).unwrap(), qs }
    }

    pub fn p(&self) -> u64 {
        self.chi.p()
    }

    /// Mellin multiplier on the component `eta`: `gamma(eta^k chi^{-1}, 1 - s, psi)` as a function of `z`.
    pub fn multiplier<C: PoleField>(&self, eta: &TameChar) -> Result<ZRat<C>> {
        let p = self.p();
        let k = self.k;
        let zk: C = self.chi.z_as()?;
        let qs = C::from_scalar(p, &self.qs)?;
        // y = c z^k with c = q^{-1} / (chi(p) q^{-s}).
        let c = C::q_pow(p, -1).div(&zk.mul(&qs))?;
        let tame = eta.power(k).mul(&self.chi.tame.inverse());
        let kk = k.unsigned_abs() as usize;
        if tame.is_trivial() {
            let one = C::one();
            if k > 0 {
                // z^k (1 - c z^k) / (z^k - 1/(q c))
                let num = UPoly::new(poly_xk(kk, &one, &c.neg()));
                let a = C::q_pow(p, -1).div(&c)?;
                let poles = a.kth_roots(kk as u32)?.into_iter().map(|r| Pole { at: r, order: 1 }).collect();
                ZRat { low: k, num, poles }.simplify()
            } else {
                // z^{-K} (z^K - c) (-q c) / (z^K - q c)
                let qc = C::q_pow(p, 1).mul(&c);
                let num = UPoly::new(poly_xk(kk, &c.neg(), &one)).scale(&qc.neg());
                let poles = qc.kth_roots(kk as u32)?.into_iter().map(|r| Pole { at: r, order: 1 }).collect();
                ZRat { low: k, num, poles }.simplify()
            }
        } else {
            if C::SYMBOLIC {
                return Err(PtwError::SymbolicRamified);
            }
            let f = tame.conductor() as i64;
            let g: C = gauss_sum_generic(&tame.inverse(), 1, &Rat::from_integer(BigInt::from(1)))?;
            Ok(ZRat::monomial(field_pow(&c, f)?.mul(&g), k * f))
        }
    }
}

// a + b x^k as a coefficient vector.
fn poly_xk<C: Coeff>(k: usize, a: &C, b: &C) -> Vec<C> {
    let mut v = vec![C::zero(); k + 1];
    v[0] = a.clone();
    v[k] = v[k].add(b);
    v
}

/// `∫_{|x| = q^{-m}} chi(x) psi(x xi) d^x x`.
pub fn shell_integral<C: crate::arith::Field>(chi: &MultChar, m: i64, xi: &Rat) -> Result<C> {
    let p = chi.p();
    let z: C = chi.z_as()?;
    let s: C = shell_psi_integral(p, &chi.tame, &(p_pow(p, m) * xi))?;
    Ok(field_pow(&z, m)?.mul(&s))
}

/// Spectral route: the Mellin transform of `f` times the kernel's gamma multiplier.
pub fn fourier_convolve_spectral<C: PoleField>(f: &ExtendedMeasure<C>, kern: &ConvolutionKernel) -> Result<MellinData<C>> {
    mellin(f)?.map(|eta, r| r.mul(&kern.multiplier(eta)?))
}

/// Direct route: evaluates the convolution on every coset of the shells `lo..=hi`.
///
/// Shells of `x` run from the first shell where `psi` can still contribute; the
/// infinite run of shells meeting a germ of `f` is summed in closed form.
pub fn fourier_convolve_shell<C: PoleField>(f: &ExtendedMeasure<C>, kern: &ConvolutionKernel, lo: i64, hi: i64) -> Result<GmMeasure<C>> {
    let p = f.p();
    let k = kern.k;
    let chi = &kern.chi;
    let zq: C = chi.z_as::<C>()?.mul(&C::from_scalar(p, &kern.qs)?);
    let f = f.canonical();
    let (clo, chi_hi) = f.compact.support().unwrap_or((0, 0));
    // Pure tail region v <= vt, pure zero-germ region v >= vz.
    let mut vt = clo - 1;
    for g in &f.tails {
        vt = vt.min(-g.start);
    }
    let mut vz = chi_hi + 1;
    for g in &f.zeros {
        vz = vz.max(g.start);
    }
    if let Some((from, _)) = &f.near_zero {
        vz = vz.max(*from);
    }
    let mut level = chi.conductor();
    for (_, t) in f.compact.shells() {
        level = level.max(t.level);
    }
    for g in &f.tails {
        level = level.max(g.tame.conductor());
    }
    for g in &f.zeros {
        level = level.max(g.tame.conductor());
    }
    let out_level = level;
    let m_min = -(level.max(1) as i64);
    let mut out = GmMeasure::zero(p);
    for w in lo..=hi {
        // m with w - k m strictly between the germ regions.
        let (m_a, m_b) = if k > 0 { (m_min, (w - vt - 1).div_euclid(k)) } else { (m_min, (vz - 1 - w).div_euclid(-k)) };
        // The germ sums need psi trivial on the remaining shells.
        let m_b = m_b.max(-1);
        let mut tables: Vec<(i64, ShellTable<C>)> = Vec::new();
        for m in m_a..=m_b {
            let t = f.shell(w - k * m)?;
            tables.push((m, t));
        }
        let m0 = m_b + 1;
        if k < 0 && f.near_zero.is_some() {
            return Err(PtwError::NonSummableTail("near-zero provider under a negative power".into()));
        }
        let mm = pz(p, out_level);
        let mut vals = vec![C::zero(); mm.max(1) as usize];
        let units: Vec<u64> = if out_level == 0 { vec![1] } else { (1..mm).filter(|r| r % p != 0).collect() };
        for &xu in &units {
            let mut acc = C::zero();
            for (m, t) in &tables {
                acc = acc.add(&shell_term(p, k, chi, &zq, *m, t, xu, out_level)?);
            }
            acc = acc.add(&germ_sum(p, k, chi, &zq, &f, w, m0, xu)?);
            vals[if out_level == 0 { 0 } else { xu as usize }] = acc;
        }
        out.add_shell(w, &ShellTable { level: out_level, vals });
    }
    Ok(out)
}

// ∫_{Z_p^x} T(a^{-k} xi_u) chi_t(a) psi(p^m a) d^x a * (chi(p) q^{-s})^m.
#[allow(clippy::too_many_arguments)]
fn shell_term<C: PoleField>(p: u64, k: i64, chi: &MultChar, zq: &C, m: i64, t: &ShellTable<C>, xu: u64, lvl: u32) -> Result<C> {
    if t.is_zero() {
        return Ok(C::zero());
    }
    let big = t.level.max(chi.conductor()).max(lvl).max((-m).max(0) as u32).max(1);
    let mod_big = pz(p, big);
    // Coefficients of psi(a / p^j), gathered by a mod p^j.
    let j = (-m).max(0) as u32;
    let mut by_phase = vec![C::zero(); pz(p, j) as usize];
    for a in (1..mod_big).filter(|a| a % p != 0) {
        let ainv = crate::arith::modinv_u64(a, mod_big).unwrap();
        let ak = if k > 0 { powmod(ainv, k as u64, mod_big) } else { powmod(a, (-k) as u64, mod_big) };
        let arg = crate::chars::mulmod(ak, xu % mod_big, mod_big);
        let val = t.at(p, arg);
        if val.is_zero() {
            continue;
        }
        let slot = (a % pz(p, j)) as usize;
        by_phase[slot] = by_phase[slot].add(&val.mul(&chi.tame.value::<C>(a)?));
    }
    let acc = root_sum(p, j, &by_phase)?;
    Ok(acc.mul(&C::q_pow(p, -(big as i64))).mul(&field_pow(zq, m)?))
}

// Closed-form sum over m >= m0 of the germ shells w - k m.
#[allow(clippy::too_many_arguments)]
fn germ_sum<C: PoleField>(p: u64, k: i64, chi: &MultChar, zq: &C, f: &ExtendedMeasure<C>, w: i64, m0: i64, xu: u64) -> Result<C> {
    let vol = C::one().sub(&C::q_pow(p, -1));
    let mut acc = C::zero();
    // Each germ is coeff * v^e * R^v * tame^{-1}(unit) on its shells, with v = w - k m.
    let mut germs: Vec<(&TameChar, C, u32, C)> = Vec::new();
    if k > 0 {
        for g in &f.tails {
            // ratio^n with n = -v is (1/ratio)^v
            germs.push((&g.tame, g.ratio(p).inv()?, g.log_power, g.coeff.clone()));
        }
    } else {
        for g in &f.zeros {
            germs.push((&g.tame, g.rho.clone(), g.log_power, g.coeff.clone()));
        }
    }
    for (tame, big_r, e, coeff) in germs {
        // ∫ tame^{-1}(a^{-k} xi_u) chi_t(a) d^x a = tame^{-1}(xi_u) (1 - 1/q) [tame^k chi_t = 1]
        if !tame.power(k).mul(&chi.tame).is_trivial() {
            continue;
        }
        let tv: C = tame.inverse().value(xu)?;
        // Σ_{m >= m0} (w - k m)^e R^{w - k m} zq^m = R^w Σ_m (w - k m)^e y^m, y = R^{-k} zq.
        let y = field_pow(&big_r, -k)?.mul(zq);
        let d = C::one().sub(&y);
        if d.near_zero() {
            return Err(PtwError::NonSummableTail(format!("germ ratio meets the kernel at y = 1 (shell {w})")));
        }
        // (w - k m)^e = Σ_j C(e, j) w^{e-j} (-k)^j m^j
        let mut s = C::zero();
        for j in 0..=e {
            let bc = crate::arith::upoly::binom(e as i64, j as i64)
                * Rat::from_integer(num::pow::pow(BigInt::from(w), (e - j) as usize))
                * Rat::from_integer(num::pow::pow(BigInt::from(-k), j as usize));
            if bc.is_zero() {
                continue;
            }
            let mut ps = C::zero();
            for (kk, c) in power_sum_numerator(j, m0) {
                ps = ps.add(&C::from_rat(&c).mul(&field_pow(&y, kk)?));
            }
            s = s.add(&ps.div(&field_pow(&d, j as i64 + 1)?)?.scale(&bc));
        }
        acc = acc.add(&coeff.mul(&field_pow(&big_r, w)?).mul(&s).mul(&tv).mul(&vol));
    }
    Ok(acc)
}
