//! `ptw`: verification suites and ad-hoc computations over Q_p.

mod cache;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ptw_core::field::{is_prime, Regime};

#[derive(Parser)]
#[command(name = "ptw", version, about = "Local transfer-operator computations over Q_p")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    cmd: Option<Command>,
}

#[derive(Args)]
struct GlobalArgs {
    /// Residue characteristic.
    #[arg(long, global = true, visible_alias = "p", default_value_t = 3)]
    prime: u64,
    /// Largest ball level any computation may touch.
    #[arg(long, global = true, default_value_t = 6)]
    precision: u32,
    #[arg(long, global = true, value_enum)]
    regime: Option<RegimeArg>,
    /// Numeric comparison tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Directory for CSV reports and JSON summaries.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run acceptance checks: `all`, a criterion number, or its name.
    #[arg(long, global = true)]
    suite: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Symbolic,
    Numeric,
}

#[derive(Subcommand)]
pub(crate) enum Command {
    /// Tate gamma factor with its L and epsilon decomposition.
    Gamma(commands::GammaArgs),
    /// Mellin transform of a measure on F^x, checked by inversion.
    Mellin(commands::MellinArgs),
    /// Tate functional equation over a family of test functions.
    TateCheck(commands::TateArgs),
    /// Multiplicative Fourier convolution, spectral route against shell sums.
    Conv(commands::ConvArgs),
    /// Shells of a basic vector and its tail in closed form.
    BasicVector(commands::BasicArgs),
    /// Transfer operators from the Kuznetsov side.
    Transfer(commands::TransferArgs),
    /// Ball-by-ball transfer of Hecke basic vectors against the trace pushforward.
    FundamentalLemma(commands::FlArgs),
    /// Scattering scalars and Plancherel densities at sample characters.
    ScatteringTable(commands::ScatterArgs),
    /// Stable pairing of transfers against the Bessel character.
    CharIdentity(commands::CharArgs),
    /// Finite-group enumeration oracles.
    Oracle(commands::OracleArgs),
}

pub struct RunConfig {
    pub prime: u64,
    pub precision: u32,
    pub regime: Option<Regime>,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_args(g: &GlobalArgs) -> Result<Self, commands::CliError> {
        use commands::CliError::Usage;
        if !is_prime(g.prime) {
            return Err(Usage(format!("{} is not prime", g.prime)));
        }
        let regime = g.regime.map(|r| match r {
            RegimeArg::Symbolic => Regime::Symbolic,
            RegimeArg::Numeric => Regime::Numeric,
        });
        if g.tolerance.is_some() && regime == Some(Regime::Symbolic) {
            return Err(Usage("--tolerance applies to the numeric regime only".into()));
        }
        let tolerance = g.tolerance.unwrap_or(1e-9);
        if !(tolerance >= 0.0) {
            return Err(Usage("--tolerance must be non-negative".into()));
        }
        Ok(RunConfig { prime: g.prime, precision: g.precision, regime, tolerance, out: g.out.clone() })
    }

    pub fn symbolic_or(&self, default: bool) -> bool {
        match self.regime {
            Some(r) => r == Regime::Symbolic,
            None => default,
        }
    }

    pub fn check_level(&self, n: i64) -> Result<(), commands::CliError> {
        if n.unsigned_abs() > self.precision as u64 {
            return Err(commands::CliError::Usage(format!("level {n} exceeds --precision {}", self.precision)));
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::from_args(&cli.global) {
        Ok(c) => c,
        Err(e) => return e.exit(),
    };
    let mut reports = vec![];
    if let Some(s) = &cli.global.suite {
        match commands::suite(&cfg, s) {
            Ok(r) => reports.push((r, None)),
            Err(e) => return e.exit(),
        }
    }
    if let Some(cmd) = cli.cmd {
        match commands::dispatch(&cfg, cmd) {
            Ok(r) => reports.push(r),
            Err(e) => return e.exit(),
        }
    } else if cli.global.suite.is_none() {
        eprintln!("nothing to do: give a subcommand or --suite (see --help)");
        return ExitCode::from(2);
    }
    let mut ok = true;
    for (r, csv_path) in &reports {
        if let Err(e) = r.emit(cfg.out.as_deref(), csv_path.as_deref()) {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(1);
        }
        if !r.passed() {
            eprint!("{}", r.diff_table());
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
