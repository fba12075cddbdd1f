//! Locally constant functions on the plane `V = F^2` with the symplectic form
//! `ω((x, y), (x', y')) = x y' - y x'`, and the exact 2-D Fourier, Radon and Jacquet
//! transforms on them.
//!
//! The normalized action of `a ∈ F^×` is `a·Φ(v) = |a| Φ(a v)`. Whittaker functions live
//! on pairs `(w, u)` with `ω(w, u) = 1` and satisfy `W(w, u - x w) = ψ(x) W(w, u)`; they are
//! stored through the section `u_w = (0, 1/w_x)` when `|w_x| ≥ |w_y|` and `(-1/w_y, 0)` otherwise.

use std::collections::BTreeMap;

use num::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{p_pow, rint, val_rat, Coeff, NumC, Rat};
use crate::error::{PtwError, Result};
use crate::field::{pz, Ball};

pub type Point = (Rat, Rat);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: Ball,
    pub y: Ball,
}

impl Cell {
    pub fn new(x: Ball, y: Ball) -> Result<Cell> {
        if x.p() != y.p() {
            return Err(PtwError::Invalid("cell coordinates over different primes".into()));
        }
        Ok(Cell { x, y })
    }

    pub fn contains(&self, v: &Point) -> bool {
        self.x.contains(&v.0) && self.y.contains(&v.1)
    }

    pub fn overlaps(&self, o: &Cell) -> bool {
        !self.x.disjoint(&o.x) && !self.y.disjoint(&o.y)
    }

    fn intersection(&self, o: &Cell) -> Cell {
        let pick = |a: &Ball, b: &Ball| if a.level() >= b.level() { a.clone() } else { b.clone() };
        Cell { x: pick(&self.x, &o.x), y: pick(&self.y, &o.y) }
    }

    /// `self ∖ inner` as disjoint cells, for `inner ⊂ self`.
    fn minus(&self, inner: &Cell) -> Vec<Cell> {
        let mut out: Vec<Cell> = ball_minus(&self.x, &inner.x).into_iter().map(|x| Cell { x, y: self.y.clone() }).collect();
        out.extend(ball_minus(&self.y, &inner.y).into_iter().map(|y| Cell { x: inner.x.clone(), y }));
        out
    }

    pub fn center(&self) -> Point {
        (self.x.center().clone(), self.y.center().clone())
    }
}

fn ball_minus(outer: &Ball, inner: &Ball) -> Vec<Ball> {
    let mut out = vec![];
    let mut cur = outer.clone();
    while cur.level() < inner.level() {
        let mut next = None;
        for c in cur.children() {
            if c.contains(inner.center()) {
                next = Some(c);
            } else {
                out.push(c);
            }
        }
        cur = next.expect("inner ball lies in the outer one");
    }
    out
}

/// Smallest valuation of a point of the ball.
fn ball_vmin(b: &Ball) -> i64 {
    match b.shell() {
        Some(v) if v < b.level() => v,
        _ => b.level(),
    }
}

fn val(p: u64, x: &Rat) -> Option<i64> {
    val_rat(p, x)
}

/// Smallest valuation of the coordinates of a nonzero point.
pub fn point_val(p: u64, v: &Point) -> Result<i64> {
    match (val(p, &v.0), val(p, &v.1)) {
        (None, None) => Err(PtwError::ZeroInput),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (Some(a), Some(b)) => Ok(a.min(b)),
    }
}

pub fn omega(v: &Point, w: &Point) -> Rat {
    &v.0 * &w.1 - &v.1 * &w.0
}

/// A point `u` with `ω(u, v) = 1`, taken along the larger coordinate of `v`.
pub fn dual_point(p: u64, v: &Point) -> Result<Point> {
    let (vx, vy) = (val(p, &v.0), val(p, &v.1));
    let use_y = match (vx, vy) {
        (None, None) => return Err(PtwError::ZeroInput),
        (_, None) => false,
        (None, _) => true,
        (Some(a), Some(b)) => b <= a,
    };
    Ok(if use_y { (v.1.recip(), Rat::zero()) } else { (Rat::zero(), -v.0.recip()) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneFunction<C> {
    pub p: u64,
    cells: BTreeMap<Cell, C>,
}

impl<C: Coeff> PlaneFunction<C> {
    pub fn zero(p: u64) -> Self {
        PlaneFunction { p, cells: BTreeMap::new() }
    }

    pub fn indicator(cell: Cell) -> Self {
        let mut f = Self::zero(cell.x.p());
        f.add_cell(cell, C::one());
        f
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Cell, &C)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Adds `c · 1_cell`, splitting overlapping cells so that stored cells stay disjoint.
    pub fn add_cell(&mut self, cell: Cell, c: C) {
        let mut pending = vec![(cell, c)];
        while let Some((cell, c)) = pending.pop() {
            if c.is_zero() {
                continue;
            }
            let hit = self.cells.keys().find(|e| e.overlaps(&cell)).cloned();
            let Some(e) = hit else {
                self.cells.insert(cell, c);
                continue;
            };
            if e == cell {
                let s = self.cells[&e].add(&c);
                if s.is_zero() {
                    self.cells.remove(&e);
                } else {
                    self.cells.insert(e, s);
                }
                continue;
            }
            let ce = self.cells.remove(&e).unwrap();
            let i = e.intersection(&cell);
            for piece in e.minus(&i) {
                self.cells.insert(piece, ce.clone());
            }
            self.cells.insert(i.clone(), ce);
            pending.extend(cell.minus(&i).into_iter().map(|x| (x, c.clone())));
            pending.push((i, c));
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut f = self.clone();
        for (cell, c) in &o.cells {
            f.add_cell(cell.clone(), c.clone());
        }
        f
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut f = Self::zero(self.p);
        for (cell, d) in &self.cells {
            f.add_cell(cell.clone(), d.mul(c));
        }
        f
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&C::one().neg()))
    }

    /// Largest coefficient deviation from zero.
    pub fn max_deviation(&self) -> f64 {
        self.cells.values().map(|c| c.deviation(&C::zero())).fold(0.0, f64::max)
    }

    pub fn eval(&self, v: &Point) -> C {
        self.cells.iter().filter(|(cell, _)| cell.contains(v)).fold(C::zero(), |a, (_, c)| a.add(c))
    }

    /// `a·Φ(v) = |a| Φ(a v)`.
    pub fn act(&self, a: &Rat) -> Result<Self> {
        let va = val(self.p, a).ok_or(PtwError::ZeroInput)?;
        let mut f = Self::zero(self.p);
        let abs = C::q_pow(self.p, -va);
        for (cell, c) in &self.cells {
            let x = Ball::new(self.p, &(cell.x.center() / a), cell.x.level() - va)?;
            let y = Ball::new(self.p, &(cell.y.center() / a), cell.y.level() - va)?;
            f.cells.insert(Cell { x, y }, c.mul(&abs));
        }
        Ok(f)
    }

    /// Finest cell level.
    pub fn max_level(&self) -> i64 {
        self.cells.keys().map(|c| c.x.level().max(c.y.level())).max().unwrap_or(0)
    }

    /// Smallest coordinate valuation over the support.
    pub fn support_val(&self) -> i64 {
        self.cells.keys().map(|c| ball_vmin(&c.x).min(ball_vmin(&c.y))).min().unwrap_or(0)
    }

    /// `𝔉Φ(v*) = ∫ Φ(v) ψ(sign · ω(v, v*)) dv` at one point.
    pub fn fourier_at(&self, w: &Point, sign: i32) -> Result<C> {
        let mut acc = C::zero();
        for (cell, c) in &self.cells {
            // ω(v, w) = x w_y - y w_x.
            let Some(fx) = ball_ft::<C>(&cell.x, &w.1, sign)? else { continue };
            let Some(fy) = ball_ft::<C>(&cell.y, &(-&w.0), sign)? else { continue };
            acc = acc.add(&c.mul(&fx).mul(&fy));
        }
        Ok(acc)
    }
}

/// `∫_B ψ(sign · x ξ) dx`, or `None` off the dual ball.
fn ball_ft<C: Coeff>(b: &Ball, xi: &Rat, sign: i32) -> Result<Option<C>> {
    let p = b.p();
    if let Some(v) = val(p, xi) {
        if v < -b.level() {
            return Ok(None);
        }
    }
    let ph = C::psi(p, &(b.center() * xi * rint(sign as i64)))?;
    Ok(Some(ph.mul(&C::q_pow(p, -b.level()))))
}

/// Cells of `ball(0, -n)` on which `ξ ↦ ψ(c ξ)` is constant.
fn phase_cells(p: u64, c: &Rat, n: i64) -> Result<Vec<Ball>> {
    let level = match val(p, c) {
        Some(v) => (-n).max(-v),
        None => -n,
    };
    Ok(Ball::new(p, &Rat::zero(), -n)?.refine(level))
}

/// The exact 2-D Fourier transform with character `ψ^{sign}`.
pub fn fourier_2d<C: Coeff>(phi: &PlaneFunction<C>, sign: i32) -> Result<PlaneFunction<C>> {
    let p = phi.p;
    let s = rint(sign as i64);
    let mut out = PlaneFunction::zero(p);
    for (cell, c) in &phi.cells {
        let (c1, n1) = (cell.x.center(), cell.x.level());
        let (c2, n2) = (cell.y.center(), cell.y.level());
        let vol = C::q_pow(p, -n1 - n2);
        // Output coordinates (a, b): phase ψ(s (c1 b - c2 a)).
        let bs = phase_cells(p, c1, n1)?;
        let as_ = phase_cells(p, c2, n2)?;
        for a in &as_ {
            let pa = C::psi(p, &(-(c2 * a.center()) * &s))?;
            for b in &bs {
                let pb = C::psi(p, &(c1 * b.center() * &s))?;
                out.add_cell(Cell { x: a.clone(), y: b.clone() }, c.mul(&vol).mul(&pa).mul(&pb));
            }
        }
    }
    Ok(out)
}

/// `∫ Φ(u - z v) ψ(phase · z) dz`; `phase = 0` is the plain line integral.
pub fn line_integral<C: Coeff>(phi: &PlaneFunction<C>, u: &Point, v: &Point, phase: i32) -> Result<C> {
    let p = phi.p;
    let mut acc = C::zero();
    for (cell, c) in &phi.cells {
        let Some(z) = line_ball(p, u, v, cell)? else { continue };
        let z = z.ok_or_else(|| PtwError::Invalid("line direction is zero".into()))?;
        let val = if phase == 0 {
            z.volume::<C>()
        } else if z.level() >= 0 {
            C::psi(p, &(z.center() * rint(phase as i64)))?.mul(&z.volume::<C>())
        } else {
            continue;
        };
        acc = acc.add(&c.mul(&val));
    }
    Ok(acc)
}

/// `{z : u - z v ∈ cell}`: `None` if empty, `Some(None)` if all of `F`.
fn line_ball(p: u64, u: &Point, v: &Point, cell: &Cell) -> Result<Option<Option<Ball>>> {
    let one = |uc: &Rat, vc: &Rat, b: &Ball| -> Result<Option<Option<Ball>>> {
        match val(p, vc) {
            None => Ok(if b.contains(uc) { Some(None) } else { None }),
            Some(w) => Ok(Some(Some(Ball::new(p, &((uc - b.center()) / vc), b.level() - w)?))),
        }
    };
    let (Some(a), Some(b)) = (one(&u.0, &v.0, &cell.x)?, one(&u.1, &v.1, &cell.y)?) else {
        return Ok(None);
    };
    Ok(match (a, b) {
        (None, b) => Some(b),
        (a, None) => Some(a),
        (Some(a), Some(b)) => {
            if a.contains_ball(&b) {
                Some(Some(b))
            } else if b.contains_ball(&a) {
                Some(Some(a))
            } else {
                None
            }
        }
    })
}

/// `𝔑Φ(v) = ∫ Φ(u - z v) dz` with `ω(u, v) = 1`.
pub fn radon_2d<C: Coeff>(phi: &PlaneFunction<C>, v: &Point) -> Result<C> {
    let u = dual_point(phi.p, v)?;
    line_integral(phi, &u, v, 0)
}

/// Adjoint Jacquet integral `𝔍*Φ(v, u) = ∫ Φ(u - z v) ψ(z) dz` for `ω(v, u) = 1`.
pub fn jacquet_adjoint<C: Coeff>(phi: &PlaneFunction<C>, v: &Point, u: &Point) -> Result<C> {
    if omega(v, u) != Rat::one() {
        return Err(PtwError::Invalid("pair is not on the torsor ω = 1".into()));
    }
    line_integral(phi, u, v, 1)
}

/// Unit residues mod `p^l`, as rationals.
fn units_mod(p: u64, l: u32) -> Vec<Rat> {
    (1..pz(p, l)).filter(|u| u % p != 0).map(|u| Rat::from_integer(u.into())).collect()
}

/// Shell window `[lo, hi)` and tail value for `a ↦ 𝔑(a·Φ)(v)`: it vanishes for
/// `v(a) < lo` and equals the constant `∫ Φ(z v) dz` for `v(a) ≥ hi`.
fn radon_window<C: Coeff>(phi: &PlaneFunction<C>, v: &Point) -> Result<(i64, i64, i64, C)> {
    let p = phi.p;
    let u = dual_point(p, v)?;
    let vu = point_val(p, &u)?;
    let nmax = phi.max_level();
    let lo = phi.support_val() + point_val(p, v)?;
    let hi = (nmax - vu).max(0).max(lo);
    let tail = line_integral(phi, &(Rat::zero(), Rat::zero()), &(-&v.0, -&v.1), 0)?;
    Ok((lo, hi, nmax - vu, tail))
}

/// `∫ 𝔑(a·Φ)(v) ψ(sign · a) |a| d^×a`, shell by shell, with the constant tail near zero
/// summed in closed form.
pub fn radon_fourier_rhs<C: Coeff>(phi: &PlaneFunction<C>, v: &Point, sign: i32) -> Result<C> {
    let p = phi.p;
    if phi.is_empty() {
        return Ok(C::zero());
    }
    let (lo, hi, span, tail) = radon_window(phi, v)?;
    let s = rint(sign as i64);
    let mut acc = tail.mul(&C::q_pow(p, -hi));
    for k in lo..hi {
        let l = (span - k).max(-k).max(1) as u32;
        let parts: Result<Vec<C>> = units_mod(p, l)
            .into_par_iter()
            .map(|u| {
                let a = p_pow(p, k) * u;
                let r = radon_2d(&phi.act(&a)?, v)?;
                Ok(r.mul(&C::psi(p, &(&a * &s))?))
            })
            .collect();
        acc = acc.add(&crate::arith::sum(parts?).mul(&C::q_pow(p, -k - l as i64)));
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeRow {
    pub at: (String, String),
    pub lhs: NumC,
    pub rhs: NumC,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeReport {
    pub rows: Vec<ExchangeRow>,
    pub max_deviation: f64,
}

impl ExchangeReport {
    fn from_rows(rows: Vec<ExchangeRow>) -> Self {
        let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
        ExchangeReport { rows, max_deviation }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

fn row<C: Coeff>(p: u64, at: &Point, lhs: &C, rhs: &C) -> Result<ExchangeRow> {
    Ok(ExchangeRow { at: (crate::arith::fmt_rat(&at.0), crate::arith::fmt_rat(&at.1)), lhs: lhs.to_numc(p)?, rhs: rhs.to_numc(p)?, deviation: lhs.deviation(rhs) })
}

/// Compares `𝔉Φ(v)` with the shell evaluation of the Radon side at each point.
/// `sign` is the power of `ψ` paired with `a` on the Radon side.
pub fn verify_radon_fourier<C: Coeff>(phi: &PlaneFunction<C>, at: &[Point], sign: i32) -> Result<ExchangeReport> {
    let mut rows = vec![];
    for v in at {
        let lhs = phi.fourier_at(v, 1)?;
        let rhs = radon_fourier_rhs(phi, v, sign)?;
        rows.push(row(phi.p, v, &lhs, &rhs)?);
    }
    Ok(ExchangeReport::from_rows(rows))
}

/// Compares `𝔍*(𝔉*Φ)` with `𝔍*Φ` on torsor points `(v, u)`; this is the identity
/// `𝔉 ∘ 𝔍 = 𝔍` tested against `Φ`.
pub fn verify_jacquet_adjoint<C: Coeff>(phi: &PlaneFunction<C>, at: &[(Point, Point)]) -> Result<ExchangeReport> {
    let f = fourier_2d(phi, -1)?;
    let mut rows = vec![];
    for (v, u) in at {
        let lhs = jacquet_adjoint(&f, v, u)?;
        let rhs = jacquet_adjoint(phi, v, u)?;
        rows.push(row(phi.p, v, &lhs, &rhs)?);
    }
    Ok(ExchangeReport::from_rows(rows))
}

/// Section of the torsor over `w`: `ω(w, u_w) = 1`.
pub fn section(p: u64, w: &Point) -> Result<Point> {
    let (a, b) = (val(p, &w.0), val(p, &w.1));
    let use_x = match (a, b) {
        (None, None) => return Err(PtwError::ZeroInput),
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a <= b,
    };
    Ok(if use_x { (Rat::zero(), w.0.recip()) } else { (-w.1.recip(), Rat::zero()) })
}

/// Which coordinate drives the section on a cell, if the cell avoids the switch.
fn section_axis(cell: &Cell) -> Option<usize> {
    let (ax, ay) = (cell.x.shell().filter(|v| *v < cell.x.level()), cell.y.shell().filter(|v| *v < cell.y.level()));
    match (ax, ay) {
        (Some(a), _) if a <= ball_vmin(&cell.y) => Some(0),
        (_, Some(b)) if b < ball_vmin(&cell.x) => Some(1),
        _ => None,
    }
}

/// A Whittaker function, stored by its values `W(w, u_w)` on cells of `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct WhittakerPlaneFunction<C> {
    pub p: u64,
    cells: BTreeMap<Cell, C>,
}

impl<C: Coeff> WhittakerPlaneFunction<C> {
    pub fn zero(p: u64) -> Self {
        WhittakerPlaneFunction { p, cells: BTreeMap::new() }
    }

    /// Adds a cell; it must avoid the other cells and lie on one side of `|w_x| = |w_y|`.
    pub fn insert(&mut self, cell: Cell, c: C) -> Result<()> {
        if section_axis(&cell).is_none() {
            return Err(PtwError::Invalid(format!("cell {} x {} straddles the section switch", cell.x, cell.y)));
        }
        if self.cells.keys().any(|e| e.overlaps(&cell)) {
            return Err(PtwError::Invalid("overlapping Whittaker cells".into()));
        }
        self.cells.insert(cell, c);
        Ok(())
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Cell, &C)> {
        self.cells.iter()
    }

    /// `W(w, u)` for `ω(w, u) = 1`.
    pub fn eval(&self, w: &Point, u: &Point) -> Result<C> {
        if omega(w, u) != Rat::one() {
            return Err(PtwError::Invalid("pair is not on the torsor ω = 1".into()));
        }
        let Some((_, c)) = self.cells.iter().find(|(cell, _)| cell.contains(w)) else {
            return Ok(C::zero());
        };
        let s = section(self.p, w)?;
        // u = u_w - x w.
        let x = if !w.0.is_zero() { (&s.0 - &u.0) / &w.0 } else { (&s.1 - &u.1) / &w.1 };
        Ok(c.mul(&C::psi(self.p, &x)?))
    }
}

/// `𝔍W(v) = ∫ W(u_1 - z v, v) dz` with `ω(u_1, v) = 1`.
///
/// On each cell the phase `x(z) = -v_i / w_i(z)` is a Möbius map with `|w_i|` fixed, so it
/// carries the ball of admissible `z` onto a ball of `x`, scaling by `|v_i|^2 / |w_i|^2`.
/// The piece is `vol · ψ(x(z_0))` when the image has level `≥ 0`, and zero otherwise.
pub fn jacquet_integral<C: Coeff>(w: &WhittakerPlaneFunction<C>, v: &Point) -> Result<C> {
    let p = w.p;
    let u1 = dual_point(p, v)?;
    let vals = [val(p, &v.0), val(p, &v.1)];
    let mut acc = C::zero();
    for (cell, c) in &w.cells {
        let axis = section_axis(cell).unwrap();
        // The admissible z-ball has the finest of the per-coordinate levels, so the image
        // level is known from valuations before any ball is built.
        if let Some(vi) = vals[axis] {
            let balls = [&cell.x, &cell.y];
            let zl = (0..2).filter_map(|k| vals[k].map(|vk| balls[k].level() - vk)).max().unwrap();
            if zl + 2 * vi - 2 * balls[axis].shell().unwrap() < 0 {
                continue;
            }
        }
        let Some(z) = line_ball(p, &u1, v, cell)? else { continue };
        let z = z.ok_or_else(|| PtwError::Invalid("line direction is zero".into()))?;
        let (ui, vi, bi) = if axis == 0 { (&u1.0, &v.0, &cell.x) } else { (&u1.1, &v.1, &cell.y) };
        let image_level = match val(p, vi) {
            None => 0,
            Some(vv) => z.level() + 2 * vv - 2 * bi.shell().unwrap(),
        };
        if image_level < 0 {
            continue;
        }
        let wi = ui - z.center() * vi;
        let phase = C::psi(p, &(-(vi / &wi)))?;
        acc = acc.add(&c.mul(&phase).mul(&C::q_pow(p, -z.level())));
    }
    Ok(acc)
}

/// Realizes `𝔍W` as a plane function on the box `p^{-radius} 𝔬^2` at mesh `level`.
/// Fails if the values are not constant on the mesh or do not vanish on the outer shell.
pub fn realize_jacquet<C: Coeff>(w: &WhittakerPlaneFunction<C>, radius: i64, level: i64) -> Result<PlaneFunction<C>> {
    let p = w.p;
    // Grid points j p^{-radius}; coarse cell j holds the fine points j + k p^{radius + level}.
    let n = pz(p, (radius + level) as u32);
    let step = p_pow(p, -radius);
    let fine: Vec<Rat> = (0..n * p).map(|j| Rat::from_integer(j.into()) * &step).collect();
    let coarse: Vec<Ball> = (0..n).map(|j| Ball::new(p, &fine[j as usize], level)).collect::<Result<_>>()?;
    let kids = |j: u64| (0..p).map(move |k| (j + k * n) as usize);
    let values: Result<Vec<(Cell, C)>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut first: Option<C> = None;
            for a in kids(i) {
                for b in kids(j) {
                    if fine[a].is_zero() && fine[b].is_zero() {
                        continue;
                    }
                    let val = jacquet_integral(w, &(fine[a].clone(), fine[b].clone()))?;
                    match &first {
                        None => first = Some(val),
                        Some(f) if val.deviation(f) > 1e-12 => return Err(PtwError::NotLocallyConstant(level.max(0) as u32)),
                        _ => {}
                    }
                }
            }
            let cell = Cell { x: coarse[i as usize].clone(), y: coarse[j as usize].clone() };
            let first = first.unwrap_or_else(C::zero);
            let outer = ball_vmin(&cell.x).min(ball_vmin(&cell.y)) == -radius;
            if outer && first.deviation(&C::zero()) > 1e-12 {
                return Err(PtwError::NonSummableTail(format!("Jacquet integral reaches the shell |v| = q^{radius}")));
            }
            Ok((cell, first))
        })
        .collect();
    let mut f = PlaneFunction::zero(p);
    for (cell, c) in values? {
        if c.deviation(&C::zero()) > 0.0 {
            f.cells.insert(cell, c);
        }
    }
    Ok(f)
}

/// Realizes `𝔍W` on a box and compares `𝔉(𝔍W)` with `𝔍W` at the given points.
pub fn verify_jacquet_fourier<C: Coeff>(w: &WhittakerPlaneFunction<C>, radius: i64, level: i64, at: &[Point]) -> Result<ExchangeReport> {
    let j = realize_jacquet(w, radius, level)?;
    let mut rows = vec![];
    for v in at {
        let lhs = j.fourier_at(v, 1)?;
        let rhs = jacquet_integral(w, v)?;
        rows.push(row(w.p, v, &lhs, &rhs)?);
    }
    Ok(ExchangeReport::from_rows(rows))
}

/// `(∫ a·𝔉Φ(v) χ^{-1}(a) d^×a, ∫ a·𝔑Φ(v) χ^{-1}(a) d^×a)` for the unramified `χ` with
/// `χ(p) = z`, each a finite shell sum plus a geometric tail continued in `z`.
pub fn spectral_components<C: Coeff>(phi: &PlaneFunction<C>, v: &Point, z: NumC) -> Result<(NumC, NumC)> {
    let p = phi.p;
    let q = p as f64;
    let vv = point_val(p, v)?;
    let f = fourier_2d(phi, 1)?;
    // Fourier side: |a| 𝔉Φ(a v) is zero for v(a) < lo and |a| 𝔉Φ(0) for v(a) ≥ hi.
    let lo = f.support_val() - vv;
    let hi = (f.max_level() - vv).max(lo);
    let origin = f.eval(&(Rat::zero(), Rat::zero())).to_numc(p)?;
    let zq = z * NumC::real(q);
    let unit_mass = NumC::real(1.0 - 1.0 / q);
    let mut fs = origin * unit_mass * zq.powi(-hi) / (NumC::ONE - zq.powi(-1));
    for k in lo..hi {
        let l = (f.max_level() - vv - k).max(1) as u32;
        let mut shell = NumC::ZERO;
        for u in units_mod(p, l) {
            let a = p_pow(p, k) * u;
            shell = shell + f.eval(&(&a * &v.0, &a * &v.1)).to_numc(p)?;
        }
        fs = fs + shell * NumC::real(q.powi(-(k as i32) - l as i32)) * z.powi(-k);
    }
    // Radon side: a·𝔑Φ(v) = 𝔑(a^{-1}·Φ)(v); in b = a^{-1} the integrand is χ(b) 𝔑(b·Φ)(v).
    let (rlo, rhi, span, tail) = radon_window(phi, v)?;
    let tail = tail.to_numc(p)?;
    let mut rs = tail * unit_mass * z.powi(rhi) / (NumC::ONE - z);
    for k in rlo..rhi {
        let l = (span - k).max(1) as u32;
        let mut shell = NumC::ZERO;
        for u in units_mod(p, l) {
            let b = p_pow(p, k) * u;
            shell = shell + radon_2d(&phi.act(&b)?, v)?.to_numc(p)?;
        }
        rs = rs + shell * NumC::real(q.powi(-(l as i32))) * z.powi(k);
    }
    Ok((fs, rs))
}

/// Spanning cells of the level-≤1 functions used by the exchange checks: level-1 cells
/// of `𝔬^2` and level-0 cells of `(p^{-1}𝔬)^2`.
pub fn cell_basis(p: u64) -> Result<Vec<Cell>> {
    let mut out = vec![];
    for (radius, level) in [(0i64, 1i64), (1, 0)] {
        let balls = Ball::new(p, &Rat::zero(), -radius)?.refine(level);
        for x in &balls {
            for y in &balls {
                out.push(Cell { x: x.clone(), y: y.clone() });
            }
        }
    }
    Ok(out)
}

/// Whittaker cells of level 1 on the unit shell of `V^*`.
pub fn whittaker_basis(p: u64) -> Result<Vec<Cell>> {
    let balls = Ball::new(p, &Rat::zero(), 0)?.refine(1);
    let mut out = vec![];
    for x in &balls {
        for y in &balls {
            let cell = Cell { x: x.clone(), y: y.clone() };
            if section_axis(&cell).is_some() {
                out.push(cell);
            }
        }
    }
    Ok(out)
}
