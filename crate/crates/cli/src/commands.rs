use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use ptw_core::arith::{parse_rat, Coeff, NumC, RatFunc, Scalar, Var};
use ptw_core::chars::{gamma_factor, MultChar, TameChar};
use ptw_core::consistency::self_consistency;
use ptw_core::conv::{fourier_convolve_shell, fourier_convolve_spectral, ConvolutionKernel};
use ptw_core::field::UnitCoset;
use ptw_core::kuznetsov::{bessel_character, GroupTag, HeckeElement, KuznetsovVector};
use ptw_core::measures::{ExtendedMeasure, GaMeasure, GmMeasure, ShellTable};
use ptw_core::mellin::{characters_up_to, inverse_mellin, mellin_gm, verify_functional_equation, MellinData, PoleField};
use ptw_core::oracle::FiniteGroupTable;
use ptw_core::scattering::{plancherel_density, scattering_scalar, SphericalCase};
use ptw_core::stable::{self, HeckeTrace, StablePairingKernel, TraceMassSource, Transferred};
use ptw_core::{verify, PtwError};

use crate::cache::Cache;
use crate::report::Report;
use crate::{Command, RunConfig};

pub enum CliError {
    Usage(String),
    Run(String),
}

impl CliError {
    pub fn exit(&self) -> ExitCode {
        match self {
            CliError::Usage(m) => {
                eprintln!("usage error: {m}");
                ExitCode::from(2)
            }
            CliError::Run(m) => {
                eprintln!("error: {m}");
                ExitCode::from(1)
            }
        }
    }
}

impl From<PtwError> for CliError {
    fn from(e: PtwError) -> Self {
        match e {
            PtwError::SymbolicRamified | PtwError::RegimeMismatch => CliError::Usage(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}

type Res<T> = Result<T, CliError>;

fn usage<T>(m: impl Into<String>) -> Res<T> {
    Err(CliError::Usage(m.into()))
}

fn parse_numc(s: &str) -> Result<NumC, String> {
    let (a, b) = s.split_once(',').unwrap_or((s, "0"));
    let re = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(NumC::new(re, im))
}

fn tame(p: u64, conductor: u32, index: usize) -> Res<TameChar> {
    if conductor == 0 {
        return Ok(TameChar::trivial(p));
    }
    let all = TameChar::all_of_conductor(p, conductor);
    let n = all.len();
    all.into_iter().nth(index).map_or_else(|| usage(format!("--index {index} out of range: {n} characters of conductor {conductor}")), Ok)
}

fn q_minus_s(p: u64, s: f64) -> NumC {
    NumC::real((p as f64).powf(-s))
}

/// Compares two values of the same regime; symbolic values must agree exactly.
fn compare(a: &Scalar, b: &Scalar, tol: f64) -> Res<(bool, String)> {
    Ok(match (a, b) {
        (Scalar::Symbolic(x), Scalar::Symbolic(y)) => {
            let eq = x == y;
            (eq, (if eq { "equal" } else { "unequal" }).to_string())
        }
        _ => {
            let d = a.as_numc()?.dist(b.as_numc()?);
            (d <= tol, format!("{d:.3e}"))
        }
    })
}

fn deviation_cell<C: Coeff>(a: &C, b: &C, tol: f64, symbolic: bool) -> (bool, String) {
    let d = a.deviation(b);
    if symbolic {
        (d == 0.0, (if d == 0.0 { "equal" } else { "unequal" }).to_string())
    } else {
        (d <= tol, format!("{d:.3e}"))
    }
}

pub fn dispatch(cfg: &RunConfig, cmd: Command) -> Res<(Report, Option<PathBuf>)> {
    match cmd {
        Command::Gamma(a) => gamma(cfg, &a).map(|r| (r, None)),
        Command::Mellin(a) => mellin(cfg, &a).map(|r| (r, None)),
        Command::TateCheck(a) => tate_check(cfg, &a).map(|r| (r, None)),
        Command::Conv(a) => conv(cfg, &a).map(|r| (r, None)),
        Command::BasicVector(a) => basic_vector(cfg, &a).map(|r| (r, None)),
        Command::Transfer(a) => transfer(cfg, &a).map(|r| (r, None)),
        Command::FundamentalLemma(a) => fundamental_lemma(cfg, &a).map(|r| (r, a.report.clone())),
        Command::ScatteringTable(a) => scattering_table(cfg, &a).map(|r| (r, None)),
        Command::CharIdentity(a) => char_identity(cfg, &a).map(|r| (r, None)),
        Command::Oracle(a) => oracle(cfg, &a).map(|r| (r, None)),
    }
}

/// Runs the selected acceptance criteria in parallel; rows keep criterion order.
pub fn suite(_cfg: &RunConfig, name: &str) -> Res<Report> {
    let ids: Vec<u32> = if name == "all" {
        (1..=verify::NAMES.len() as u32).collect()
    } else if let Ok(n) = name.parse::<u32>() {
        if n == 0 || n as usize > verify::NAMES.len() {
            return usage(format!("no criterion {n}"));
        }
        vec![n]
    } else {
        match verify::by_name(name) {
            Some(id) => vec![id],
            None => return usage(format!("unknown suite {name:?}; expected all, 1..=13 or one of {}", verify::NAMES.join(", "))),
        }
    };
    let results: Vec<_> = ids.par_iter().map(|&i| verify::run(i)).collect();
    let mut r = Report::new("suite", &["criterion", "name", "passed", "detail"]);
    for c in results {
        r.row(vec![c.id.to_string(), c.name.into(), c.passed.to_string(), c.detail], c.passed);
    }
    Ok(r)
}

#[derive(Args)]
pub struct GammaArgs {
    /// Restrict to the unramified family.
    #[arg(long)]
    unramified: bool,
    /// Symbolic output as a rational function of z and u = q^{-s}.
    #[arg(long)]
    as_ratfunc: bool,
    #[arg(long, default_value_t = 0)]
    conductor: u32,
    /// Which character of the given conductor.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Unramified part chi(p), as `re,im`.
    #[arg(long, default_value = "0.5,0.25", value_parser = parse_numc)]
    z: NumC,
    #[arg(long, default_value_t = 0.3)]
    s: f64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    psi_sign: i32,
}

fn gamma(cfg: &RunConfig, a: &GammaArgs) -> Res<Report> {
    let p = cfg.prime;
    if a.unramified && a.conductor > 0 {
        return usage("--unramified conflicts with a positive --conductor");
    }
    if a.psi_sign.abs() != 1 {
        return usage("--psi-sign must be 1 or -1");
    }
    let symbolic = a.as_ratfunc || cfg.symbolic_or(false);
    let (chi, qs) = if symbolic {
        if a.conductor > 0 {
            return usage("symbolic gamma factors need an unramified character");
        }
        (MultChar::unramified_symbolic(p), Scalar::Symbolic(RatFunc::u()))
    } else {
        (MultChar::new(tame(p, a.conductor, a.index)?, Scalar::Numeric(a.z))?, Scalar::Numeric(q_minus_s(p, a.s)))
    };
    let g = gamma_factor(&chi, &qs, a.psi_sign)?;
    let recombined = g.l_num.mul(&g.eps)?.div(&g.l_den)?;
    let (ok, dev) = compare(&g.value, &recombined, cfg.tolerance)?;
    let mut r = Report::new("gamma", &["quantity", "value", "check", "route"]);
    r.row(vec!["gamma".into(), g.value.to_string(), String::new(), "closed-form".into()], true);
    r.row(vec!["L(chi^-1, 1-s)".into(), g.l_num.to_string(), String::new(), "closed-form".into()], true);
    r.row(vec!["L(chi, s)".into(), g.l_den.to_string(), String::new(), "closed-form".into()], true);
    r.row(vec!["epsilon".into(), g.eps.to_string(), String::new(), "closed-form".into()], true);
    r.row(vec!["epsilon L(chi^-1, 1-s) / L(chi, s)".into(), recombined.to_string(), dev, "closed-form".into()], ok);
    r.note("conductor", json!(chi.conductor()));
    r.note("symbolic", json!(symbolic));
    Ok(r)
}

#[derive(Deserialize)]
struct CosetInput {
    v: i64,
    u: u64,
    n: u32,
}

#[derive(Deserialize)]
struct TermInput {
    coset: CosetInput,
    c: String,
}

#[derive(Deserialize)]
struct MeasureInput {
    p: Option<u64>,
    terms: Vec<TermInput>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Reads `{"p": 3, "terms": [{"coset": {"v": 0, "u": 1, "n": 0}, "c": "1/2"}]}`;
/// without a file, `1_{O^x} + 2 * 1_{pO^x}`.
fn load_measure<C: Coeff>(cfg: &RunConfig, input: &Option<PathBuf>) -> Res<GmMeasure<C>> {
    let p = cfg.prime;
    let Some(path) = input else {
        let terms = [(UnitCoset::shell(0), C::one()), (UnitCoset::shell(1), C::from_int(2))];
        return Ok(GmMeasure::from_terms(p, &terms));
    };
    let m: MeasureInput = read_json(path)?;
    if m.p.is_some_and(|mp| mp != p) {
        return usage(format!("input is over p = {}, run has --prime {p}", m.p.unwrap_or_default()));
    }
    let mut terms = vec![];
    for t in m.terms {
        cfg.check_level(t.coset.v)?;
        let coset = UnitCoset::new(p, t.coset.v, t.coset.u, t.coset.n).map_err(|e| CliError::Usage(e.to_string()))?;
        let c = parse_rat(&t.c).map_err(|e| CliError::Usage(e.to_string()))?;
        terms.push((coset, C::from_rat(&c)));
    }
    Ok(GmMeasure::from_terms(p, &terms))
}

fn common_level<C: Coeff>(p: u64, a: ShellTable<C>, b: ShellTable<C>) -> (u32, ShellTable<C>, ShellTable<C>) {
    let l = a.level.max(b.level);
    (l, a.refine(p, l), b.refine(p, l))
}

/// Rows `shell, residue, a, b, check` over the unit residues where either side is nonzero.
/// Symbolic values are compared after `at_p`, since ramified components carry `q` from
/// character counts that only match at `q = p`.
fn shell_rows<C: Coeff + Display>(r: &mut Report, p: u64, v: i64, a: ShellTable<C>, b: ShellTable<C>, tol: f64, at_p: Option<&dyn Fn(&C) -> C>) {
    let (l, a, b) = common_level(p, a, b);
    for (i, (x, y)) in a.vals.iter().zip(&b.vals).enumerate() {
        if (l > 0 && i as u64 % p == 0) || (x.is_zero() && y.is_zero()) {
            continue;
        }
        let (ok, d) = match at_p {
            Some(f) => deviation_cell(&f(x), &f(y), tol, true),
            None => deviation_cell(x, y, tol, false),
        };
        r.row(vec![v.to_string(), format!("{i} mod {p}^{l}"), x.to_string(), y.to_string(), d], ok);
    }
}

#[derive(Args)]
pub struct MellinArgs {
    /// Measure on F^x as JSON; defaults to a two-term example.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Evaluation point for the numeric regime.
    #[arg(long, default_value = "0.5,0.25", value_parser = parse_numc)]
    z: NumC,
    /// Largest conductor listed in the summary.
    #[arg(long, default_value_t = 1)]
    max_conductor: u32,
}

fn mellin(cfg: &RunConfig, a: &MellinArgs) -> Res<Report> {
    let p = cfg.prime;
    let chars = characters_up_to(p, a.max_conductor);
    let label = |t: &TameChar| format!("cond={} gen={:?}", t.conductor(), t.generator_indices());
    if cfg.symbolic_or(true) {
        let f = load_measure::<RatFunc>(cfg, &a.input)?;
        let md = mellin_gm(&f)?;
        let at_p = |c: &RatFunc| c.substitute(&[(Var::Q, ptw_core::arith::rat(p as i64, 1))]).unwrap_or_else(|_| c.clone());
        let mut r = mellin_roundtrip(cfg, &f, &md, Some(&at_p))?;
        r.note("transform", md.to_json()?);
        Ok(r)
    } else {
        let f = load_measure::<NumC>(cfg, &a.input)?;
        let md = mellin_gm(&f)?;
        let mut r = mellin_roundtrip(cfg, &f, &md, None)?;
        let mut vals = serde_json::Map::new();
        for t in &chars {
            let v = md.eval(t, &a.z)?;
            vals.insert(label(t), json!([v.re, v.im]));
        }
        r.note("transform_at_z", Value::Object(vals));
        Ok(r)
    }
}

fn mellin_roundtrip<C: PoleField + Display>(cfg: &RunConfig, f: &GmMeasure<C>, md: &MellinData<C>, at_p: Option<&dyn Fn(&C) -> C>) -> Res<Report> {
    let p = cfg.prime;
    let back = inverse_mellin(md)?;
    let mut r = Report::new("mellin", &["shell", "residue", "input", "inverse_mellin", "check"]);
    r.note("routes", json!(["closed-form", "spectral"]));
    let (lo, hi) = f.support().unwrap_or((0, 0));
    for v in lo - 1..=hi + 1 {
        shell_rows(&mut r, p, v, f.shell(v), back.shell(v)?, cfg.tolerance, at_p);
    }
    Ok(r)
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    Balls,
}

#[derive(Args)]
pub struct TateArgs {
    #[arg(long, value_enum, default_value = "balls")]
    family: Family,
    /// Bound on center valuations and ball levels.
    #[arg(long, default_value_t = 3)]
    max_level: u32,
    /// Largest conductor in the numeric regime.
    #[arg(long, default_value_t = 2)]
    max_conductor: u32,
    #[arg(long, default_value = "0.6,0.8", value_parser = parse_numc)]
    z: NumC,
    #[arg(long, default_value_t = 0.3)]
    s: f64,
}

fn tate_check(cfg: &RunConfig, a: &TateArgs) -> Res<Report> {
    let p = cfg.prime;
    let Family::Balls = a.family;
    cfg.check_level(a.max_level as i64)?;
    let family = verify::ball_family(p, a.max_level as i64)?;
    let mut r = Report::new("tate-check", &["ball", "character", "lhs", "rhs", "check", "lhs_route", "rhs_route"]);
    let route = || ["closed-form".to_string(), "closed-form".to_string()];
    if cfg.symbolic_or(true) {
        let chi = MultChar::unramified_symbolic(p);
        for b in &family {
            let fe = verify_functional_equation(&GaMeasure::ball(b.clone(), RatFunc::one()), &chi, &RatFunc::u())?;
            let ok = fe.lhs == fe.rhs;
            let mut row = vec![b.to_string(), "unramified".into(), fe.lhs.to_string(), fe.rhs.to_string(), (if ok { "equal" } else { "unequal" }).into()];
            row.extend(route());
            r.row(row, ok);
        }
    } else {
        let qs = q_minus_s(p, a.s);
        let mut chars = vec![("unramified".to_string(), TameChar::trivial(p))];
        for n in 1..=a.max_conductor {
            for (i, t) in TameChar::all_of_conductor(p, n).into_iter().enumerate() {
                chars.push((format!("conductor {n} #{i}"), t));
            }
        }
        for b in &family {
            for (name, t) in &chars {
                let chi = MultChar::new(t.clone(), Scalar::Numeric(a.z))?;
                let fe = verify_functional_equation(&GaMeasure::ball(b.clone(), NumC::ONE), &chi, &qs)?;
                let mut row = vec![b.to_string(), name.clone(), fe.lhs.to_string(), fe.rhs.to_string(), format!("{:.3e}", fe.deviation)];
                row.extend(route());
                r.row(row, fe.passes(cfg.tolerance));
            }
        }
    }
    Ok(r)
}

#[derive(Args)]
pub struct ConvArgs {
    /// Kernel power: the convolution is against chi(x^k) psi(x).
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    k: i64,
    #[arg(long, default_value_t = 0)]
    conductor: u32,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value = "0.5,0.25", value_parser = parse_numc)]
    z: NumC,
    #[arg(long, default_value_t = 0.3)]
    s: f64,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Shells -W..=W are compared.
    #[arg(long, default_value_t = 4)]
    window: i64,
}

fn conv(cfg: &RunConfig, a: &ConvArgs) -> Res<Report> {
    let p = cfg.prime;
    if cfg.symbolic_or(false) {
        return usage("conv runs in the numeric regime");
    }
    if a.k == 0 {
        return usage("--k must be nonzero");
    }
    cfg.check_level(a.window)?;
    let chi = MultChar::new(tame(p, a.conductor, a.index)?, Scalar::Numeric(a.z))?;
    let kern = ConvolutionKernel::new(a.k, chi, Scalar::Numeric(q_minus_s(p, a.s)))?;
    let f = ExtendedMeasure::from_compact(load_measure::<NumC>(cfg, &a.input)?);
    let spectral = inverse_mellin(&fourier_convolve_spectral(&f, &kern)?)?;
    let direct = fourier_convolve_shell(&f, &kern, -a.window, a.window)?;
    let mut r = Report::new("conv", &["shell", "residue", "spectral", "shell_sum", "check"]);
    r.note("routes", json!(["spectral", "closed-form"]));
    for v in -a.window..=a.window {
        shell_rows(&mut r, p, v, spectral.shell(v)?, direct.shell(v), cfg.tolerance, None);
    }
    Ok(r)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    Sl2,
    Pgl2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RArg {
    Ad,
    Std2,
}

#[derive(Args)]
pub struct BasicArgs {
    #[arg(long, value_enum, default_value = "sl2")]
    group: GroupArg,
    /// The representation: adjoint for SL2, two standard factors for PGL2.
    #[arg(long, value_enum, default_value = "ad")]
    r: RArg,
    #[arg(long, default_value_t = 8)]
    shells: i64,
}

fn basic_vector(cfg: &RunConfig, a: &BasicArgs) -> Res<Report> {
    let p = cfg.prime;
    let f = match (a.group, a.r) {
        (GroupArg::Sl2, RArg::Ad) => KuznetsovVector::basic_ad(RatFunc::u()),
        (GroupArg::Pgl2, RArg::Std2) => KuznetsovVector::basic_std2(RatFunc::u(), RatFunc::w()),
        _ => return usage("basic vectors exist for sl2 with ad and pgl2 with std2"),
    };
    let op = match a.group {
        GroupArg::Sl2 => "basic-vector-sl2-ad",
        GroupArg::Pgl2 => "basic-vector-pgl2-std2",
    };
    let cache = Cache::from_env();
    let mut cached = cache.load(op, p, 0).unwrap_or_default();
    let tails = f.tail_closed_form(p)?;
    let start = f.tail_start();
    let mut r = Report::new("basic-vector", &["shell", "density", "tail_closed_form", "check"]);
    r.note("tail_start", json!(start));
    r.note("routes", json!(["closed-form", "tail-germ"]));
    let mut fresh = false;
    for j in 0..=a.shells {
        let key = j.to_string();
        let (row, ok): (Vec<String>, bool) = match cached.get(&key).and_then(|v| serde_json::from_value(v.clone()).ok()) {
            Some(hit) => hit,
            None => {
                let d = f.outer_shell(p, j)?;
                let entry = if j >= start {
                    let t = tails.iter().fold(RatFunc::zero(), |acc, (ratio, c)| acc.add(&c.mul(&ratio.pow(j))));
                    let ok = t == d;
                    (vec![key.clone(), d.to_string(), t.to_string(), (if ok { "equal" } else { "unequal" }).into()], ok)
                } else {
                    (vec![key.clone(), d.to_string(), String::new(), String::new()], true)
                };
                cached.insert(key, json!(entry));
                fresh = true;
                entry
            }
        };
        r.row(row, ok);
    }
    if fresh && r.passed() {
        cache.store(op, p, 0, &cached).map_err(|e| CliError::Run(format!("cache: {e}")))?;
    }
    Ok(r)
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TransferCase {
    Rudnick,
    Torus,
}

#[derive(Args)]
pub struct TransferArgs {
    #[arg(long, value_enum)]
    case: TransferCase,
    /// Rudnick: `{"hecke": [[m, "c"], ...]}` for the Hecke element sum c h_m applied to the
    /// basic vector; torus: a measure on F^x in the `mellin` format.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Balls of level -L..=L+1 centered in p^{-L} O.
    #[arg(long, default_value_t = 2)]
    window: i64,
    #[arg(long, default_value_t = 1)]
    max_conductor: u32,
    #[arg(long, default_value = "0.5,0.25", value_parser = parse_numc)]
    z: NumC,
}

#[derive(Deserialize)]
struct HeckeInput {
    hecke: Vec<(u32, String)>,
}

fn transfer(cfg: &RunConfig, a: &TransferArgs) -> Res<Report> {
    let p = cfg.prime;
    match a.case {
        TransferCase::Rudnick => {
            cfg.check_level(a.window + 1)?;
            let terms = match &a.input {
                Some(path) => read_json::<HeckeInput>(path)?.hecke,
                None => vec![(0, "1".into())],
            };
            let mut h = HeckeElement::<RatFunc>::new(GroupTag::SL2, BTreeMap::new())?;
            for (m, c) in terms {
                let c = parse_rat(&c).map_err(|e| CliError::Usage(e.to_string()))?;
                h = h.add(&HeckeElement::basis(p, m).scale(&RatFunc::constant(c)));
            }
            let f = KuznetsovVector::basic_ad(RatFunc::q_pow(-1)).hecke_act(&h)?;
            let t = Transferred::new(&f, p)?;
            let window = stable::ball_window(p, a.window, -a.window..=a.window + 1)?;
            let masses: Vec<_> = window.par_iter().map(|b| t.mass(b).map(|m| (b.clone(), m))).collect::<Result<_, _>>()?;
            let mut r = Report::new("transfer-rudnick", &["ball", "mass", "route"]);
            for (b, m) in masses {
                r.row(vec![b.to_string(), ptw_core::arith::fmt_rat(&m), "closed-form".into()], true);
            }
            Ok(r)
        }
        TransferCase::Torus => {
            let mut r = Report::new("transfer-torus", &["component", "value", "route"]);
            let chars = characters_up_to(p, a.max_conductor);
            let label = |t: &TameChar| format!("cond={} gen={:?}", t.conductor(), t.generator_indices());
            if cfg.symbolic_or(true) {
                let f = ExtendedMeasure::from_compact(load_measure::<RatFunc>(cfg, &a.input)?);
                let md = stable::transfer_kuznetsov_to_torus_spectral(&f)?;
                for t in &chars {
                    r.row(vec![label(t), md.component(t).to_ratfunc()?.to_string(), "spectral".into()], true);
                }
            } else {
                let f = ExtendedMeasure::from_compact(load_measure::<NumC>(cfg, &a.input)?);
                let md = stable::transfer_kuznetsov_to_torus_spectral(&f)?;
                for t in &chars {
                    r.row(vec![label(t), md.eval(t, &a.z)?.to_string(), "spectral".into()], true);
                }
            }
            Ok(r)
        }
    }
}

#[derive(Args)]
pub struct FlArgs {
    /// Window depth: balls of level -r..=depth+1 centered in p^{-r} O, r = max(depth, m+1).
    #[arg(long, default_value_t = 2)]
    depth: i64,
    /// Hecke index of the double coset.
    #[arg(long, default_value_t = 0)]
    m: u32,
    /// CSV destination.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn fundamental_lemma(cfg: &RunConfig, a: &FlArgs) -> Res<Report> {
    let p = cfg.prime;
    if a.depth < 0 {
        return usage("--depth must be non-negative");
    }
    let r = a.depth.max(a.m as i64 + 1);
    cfg.check_level(a.depth + 1)?;
    cfg.check_level(r)?;
    let window = stable::ball_window(p, r, -r..=a.depth + 1)?;
    let rows = stable::fundamental_lemma_rows(p, a.m, &window)?;
    let mut rep = Report::new("fundamental-lemma", &["ball", "lhs", "rhs", "equal", "lhs_route", "rhs_route"]);
    rep.note("m", json!(a.m));
    for row in rows {
        let ok = row.equal();
        rep.row(vec![row.ball.to_string(), ptw_core::arith::fmt_rat(&row.lhs), ptw_core::arith::fmt_rat(&row.rhs), ok.to_string(), "closed-form".into(), "oracle".into()], ok);
    }
    Ok(rep)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    All,
    Whittaker,
    Torus,
    Group,
    WhittakerPgl2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct ScatterArgs {
    #[arg(long, value_enum, default_value = "all")]
    case: CaseArg,
    #[arg(long, default_value_t = 8)]
    z_samples: u32,
    /// Samples lie on the circle |z| = radius.
    #[arg(long, default_value_t = 0.7)]
    radius: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn case_name(c: SphericalCase) -> &'static str {
    match c {
        SphericalCase::Whittaker => "whittaker",
        SphericalCase::TorusQuotient => "torus",
        SphericalCase::GroupCase => "group",
        SphericalCase::WhittakerPgl2 => "whittaker-pgl2",
    }
}

fn scattering_table(cfg: &RunConfig, a: &ScatterArgs) -> Res<Report> {
    let p = cfg.prime;
    if cfg.symbolic_or(false) {
        return usage("scattering-table samples numeric characters");
    }
    if a.z_samples == 0 {
        return usage("--z-samples must be positive");
    }
    let cases: Vec<SphericalCase> = SphericalCase::ALL
        .into_iter()
        .filter(|c| match a.case {
            CaseArg::All => true,
            CaseArg::Whittaker => *c == SphericalCase::Whittaker,
            CaseArg::Torus => *c == SphericalCase::TorusQuotient,
            CaseArg::Group => *c == SphericalCase::GroupCase,
            CaseArg::WhittakerPgl2 => *c == SphericalCase::WhittakerPgl2,
        })
        .collect();
    let mut r = Report::new("scattering-table", &["case", "z", "scattering", "plancherel", "plancherel_at_inverse", "check"]);
    r.json_rows = a.format == Format::Json;
    let n = a.z_samples as f64;
    for case in cases {
        for k in 0..a.z_samples {
            let z = NumC::cis(std::f64::consts::TAU * (k as f64 + 0.5) / n) * NumC::real(a.radius);
            let chi = MultChar::unramified(p, Scalar::Numeric(z))?;
            let s = scattering_scalar(case, &chi)?;
            let mu = plancherel_density(case, &chi)?;
            let mu_inv = plancherel_density(case, &chi.inverse()?)?;
            let (ok, d) = compare(&s, &mu_inv, cfg.tolerance)?;
            r.row(vec![case_name(case).into(), z.to_string(), s.to_string(), mu.to_string(), mu_inv.to_string(), d], ok);
        }
    }
    Ok(r)
}

#[derive(Args)]
pub struct CharArgs {
    #[arg(long, default_value_t = 3)]
    max_m: u32,
    /// Shell depth of the calibration.
    #[arg(long, default_value_t = 3)]
    levels: u32,
}

fn char_identity(cfg: &RunConfig, a: &CharArgs) -> Res<Report> {
    let p = cfg.prime;
    let kern = StablePairingKernel::calibrate(p, a.levels)?;
    let chi = MultChar::unramified_symbolic(p);
    let mut r = Report::new("char-identity", &["item", "lhs", "rhs", "equal", "lhs_route", "rhs_route"]);
    let cal = kern.pair(&HeckeTrace::new(p, 0, 7, ptw_core::arith::rat(1, 1))?, &chi, 0)?;
    let ok = cal.is_one();
    r.row(vec!["calibration".into(), cal.to_string(), "1".into(), ok.to_string(), "oracle".into(), "closed-form".into()], ok);
    for m in 0..=a.max_m {
        let f = KuznetsovVector::basic_ad(RatFunc::q_pow(-1)).hecke_act(&HeckeElement::basis(p, m))?;
        let lhs = stable::stable_pairing_of_transfer(&kern, &f, &chi)?;
        let rhs = bessel_character(&chi, &f)?.substitute(&[(Var::Q, ptw_core::arith::rat(p as i64, 1))])?;
        let ok = lhs == rhs;
        r.row(vec![format!("m={m}"), lhs.to_string(), rhs.to_string(), ok.to_string(), "closed-form".into(), "spectral".into()], ok);
    }
    Ok(r)
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OracleOp {
    /// Trace fibers of SL2(Z/p^k).
    TraceFiber,
    /// Closed forms against enumeration.
    Consistency,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    op: OracleOp,
    /// Enumeration exponent (trace-fiber) or Hecke depth (consistency).
    #[arg(long, default_value_t = 2)]
    k: u32,
}

fn oracle(cfg: &RunConfig, a: &OracleArgs) -> Res<Report> {
    let p = cfg.prime;
    match a.op {
        OracleOp::TraceFiber => {
            cfg.check_level(a.k as i64 + 1)?;
            let cache = Cache::from_env();
            let mut r = Report::new("trace-fiber", &["trace", "count", "count_from_finer_level", "equal", "route"]);
            if let Some(hit) = cache.load("trace-fiber", p, a.k) {
                for (t, v) in &hit {
                    let (count, finer): (u64, u64) = serde_json::from_value(v.clone()).map_err(|e| CliError::Run(format!("cache: {e}")))?;
                    r.row(vec![t.clone(), count.to_string(), finer.to_string(), (count == finer).to_string(), "oracle".into()], count == finer);
                }
                r.note("cached", json!(true));
                return Ok(r);
            }
            // Reduction SL2(Z/p^{k+1}) -> SL2(Z/p^k) is onto with fibers of size p^3.
            let coarse = FiniteGroupTable::new(p, a.k)?.trace_histogram(1);
            let fine = FiniteGroupTable::new(p, a.k + 1)?.trace_histogram(1);
            let m = coarse.len();
            let mut folded = vec![0u64; m];
            for (t, c) in fine.iter().enumerate() {
                folded[t % m] += c;
            }
            let mut cells = BTreeMap::new();
            for (t, (c, f)) in coarse.iter().zip(&folded).enumerate() {
                let finer = f / (p * p * p);
                let ok = f % (p * p * p) == 0 && finer == *c;
                let key = format!("{t:0>width$}", width = (m - 1).to_string().len());
                cells.insert(key.clone(), json!([c, finer]));
                r.row(vec![key, c.to_string(), finer.to_string(), ok.to_string(), "oracle".into()], ok);
            }
            r.note("order", json!(coarse.iter().sum::<u64>()));
            if r.passed() {
                cache.store("trace-fiber", p, a.k, &cells).map_err(|e| CliError::Run(format!("cache: {e}")))?;
            }
            Ok(r)
        }
        OracleOp::Consistency => {
            let rows = self_consistency(p, a.k)?;
            let mut r = Report::new("consistency", &["family", "item", "closed_form", "oracle", "deviation", "lhs_route", "rhs_route"]);
            for row in rows {
                let ok = row.ok(cfg.tolerance);
                r.row(
                    vec![row.family.into(), row.item, row.closed_form.to_string(), row.oracle.to_string(), format!("{:.3e}", row.deviation), "closed-form".into(), "oracle".into()],
                    ok,
                );
            }
            Ok(r)
        }
    }
}
