//! `qleg` evaluates the q-polynomial families, runs the verification suites
//! and prints truncated spectra and `q ↑ 1` error tables.
//!
//! Exit status: 0 when every report passes, 1 on a failed report, 2 on a
//! usage error and 3 when a sum or product fails to converge.

mod eval;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qleg::classical::{
    kernel_limit_scan, limit_family_scan, ratio_asymptotic, ErrorTable, LimitFamily, LimitScanConfig, TestPolynomial,
};
use qleg::operator::{spectrum_check, Gauge, TruncatedRep};
use qleg::qcore::MAX_TERMS_ENV;
use qleg::suites::{run_all, run_suite, Suite, SuiteConfig, DEFAULT_SEED};
use qleg::{Error, Precision, QBase, VerificationReport};

use crate::eval::EvalArgs;
use crate::output::{Format, Sink};

#[derive(Debug, Parser)]
#[command(name = "qleg", version, about = "q-polynomial evaluation and identity verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one family at a list of points.
    Eval(EvalArgs),
    /// Run a verification suite and stream its reports.
    Verify(VerifyArgs),
    /// Compare the truncated operator's spectrum with the predicted one.
    Spectrum(SpectrumArgs),
    /// Error table of a q-family against its classical limit along q = r^{1/p}.
    LimitScan(LimitScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
struct Common {
    /// Arithmetic for the run; suites pick per identity when omitted.
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    /// Override the tolerance of every report.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// addition, product, orthogonality, charlier, spectral, operator,
    /// special, limits, cross-path or all.
    suite: String,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GaugeArg {
    Real,
    Complex,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 60)]
    dim: usize,
    /// Number of eigenvalues, largest in modulus first.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, value_enum, default_value_t = GaugeArg::Real)]
    gauge: GaugeArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanFamily {
    BigQJacobi,
    LittleQJacobi,
    DualQKrawtchouk,
    /// Ratio `P̂_{p+m}/P̂_p` against its power of `ρ`.
    Ratio,
    /// Weighted pairing of orthonormal polynomials against the arcsine law.
    Kernel,
}

#[derive(Debug, Args)]
struct LimitScanArgs {
    #[arg(value_enum)]
    family: ScanFamily,
    /// Degree `n` (big and little q-Jacobi) or `l` (dual q-Krawtchouk).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Order `m` for dual q-Krawtchouk, ratio and kernel scans.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    m: i64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    d: f64,
    /// Probe point of the ratio scan.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    x: f64,
    /// Monomial coefficients of the kernel test function, lowest first.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0], allow_negative_numbers = true)]
    coeffs: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Increasing values of p; q = r^{1/p}.
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 8, 16, 32])]
    p: Vec<u32>,
    /// Largest acceptable final error.
    #[arg(long, default_value_t = 0.05)]
    cap: f64,
    #[command(flatten)]
    common: Common,
}

/// Everything that ends a run early.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(Error::NonConvergence { .. }) => 3,
            Failure::Core(Error::EigensolveFailure(_) | Error::IllConditioned { .. }) => 1,
            Failure::Core(_) => 2,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn check_env() -> Result<(), Failure> {
    match std::env::var(MAX_TERMS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(()),
            _ => Err(Failure::Usage(format!("{MAX_TERMS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(()),
    }
}

fn verify(args: VerifyArgs) -> Outcome {
    let cfg = SuiteConfig {
        seed: args.common.seed,
        precision: args.common.precision.map(Precision::from),
        tolerance: args.common.tol,
        l: args.l,
        p: args.p,
        q: args.q,
        c: args.c,
        d: args.d,
        x: args.x,
        sigma: args.sigma,
        dim: args.dim,
    };
    let reports = if args.suite == "all" {
        run_all(&cfg)?
    } else {
        let suite: Suite = args.suite.parse().map_err(Failure::Usage)?;
        run_suite(suite, &cfg)?
    };
    let mut sink = Sink::open(args.common.output.as_deref())?;
    sink.reports(&reports, args.common.format.unwrap_or(Format::Json))?;
    Ok(reports.iter().all(|r| r.passed))
}

fn spectrum(args: SpectrumArgs) -> Outcome {
    let gauge = match args.gauge {
        GaugeArg::Real => Gauge::RealGauged,
        GaugeArg::Complex => Gauge::Complex,
    };
    let rep = TruncatedRep::new(args.dim, args.sigma, QBase::new(args.q)?, gauge)?;
    let reports = spectrum_check(&rep, args.count, args.common.tol.unwrap_or(1e-10))?;
    let mut sink = Sink::open(args.common.output.as_deref())?;
    match args.common.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.spectrum_csv(&reports)?,
        other => sink.reports(&reports, other)?,
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn limit_scan(args: LimitScanArgs) -> Outcome {
    let cfg = LimitScanConfig::new(args.r, args.p.clone(), args.cap)?;
    let order = || -> Result<usize, Failure> {
        usize::try_from(args.m).map_err(|_| Failure::Usage(format!("--m must be nonnegative here, got {}", args.m)))
    };
    let table: ErrorTable = match args.family {
        ScanFamily::BigQJacobi => limit_family_scan(
            &cfg,
            &LimitFamily::BigQJacobi { n: args.n, alpha: args.alpha, beta: args.beta, c: args.c, d: args.d },
        )?,
        ScanFamily::LittleQJacobi => {
            limit_family_scan(&cfg, &LimitFamily::LittleQJacobi { n: args.n, alpha: args.alpha, beta: args.beta })?
        }
        ScanFamily::DualQKrawtchouk => {
            limit_family_scan(&cfg, &LimitFamily::DualQKrawtchouk { l: args.n, m: order()?, c: args.c, d: args.d })?
        }
        ScanFamily::Ratio => ratio_asymptotic(args.m, args.x, args.r, args.c, args.d, &cfg)?,
        ScanFamily::Kernel => kernel_limit_scan(&TestPolynomial(args.coeffs.clone()), args.m, args.c, args.d, &cfg)?,
    };
    let report: VerificationReport = table.report(cfg.cap);
    let mut sink = Sink::open(args.common.output.as_deref())?;
    match args.common.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.scan_csv(&table)?,
        other => sink.reports(std::slice::from_ref(&report), other)?,
    }
    Ok(report.passed)
}

fn run(cli: Cli) -> Outcome {
    check_env()?;
    match cli.command {
        Command::Eval(args) => eval::run(args),
        Command::Verify(args) => verify(args),
        Command::Spectrum(args) => spectrum(args),
        Command::LimitScan(args) => limit_scan(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // A closed pipe (e.g. `| head`) is the reader's choice, not a failure.
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qleg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(Failure::Usage("x".into()).exit_code(), 2);
        assert_eq!(Failure::Core(Error::NonConvergence { what: "s".into(), terms: 3 }).exit_code(), 3);
        assert_eq!(Failure::Core(Error::InvalidParameter("q".into())).exit_code(), 2);
        assert_eq!(Failure::Core(Error::EigensolveFailure("ql".into())).exit_code(), 1);
    }

    #[test]
    fn parses_global_flags_after_the_subcommand() {
        let cli = Cli::try_parse_from(["qleg", "verify", "addition", "--l", "0", "--seed", "3", "--format", "human"]).unwrap();
        match cli.command {
            Command::Verify(v) => {
                assert_eq!(v.l, Some(0));
                assert_eq!(v.common.seed, 3);
                assert_eq!(v.common.format, Some(Format::Human));
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn scan_accepts_comma_lists() {
        let cli = Cli::try_parse_from(["qleg", "limit-scan", "kernel", "--coeffs", "0,0,1", "--p", "4,8"]).unwrap();
        match cli.command {
            Command::LimitScan(a) => {
                assert_eq!(a.coeffs, vec![0.0, 0.0, 1.0]);
                assert_eq!(a.p, vec![4, 8]);
            }
            other => panic!("parsed {other:?}"),
        }
    }
}
