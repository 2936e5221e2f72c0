//! The `eval` subcommand.

use clap::{Args, ValueEnum};
use qleg::classical::{chebyshev_t, jacobi_r, legendre};
use qleg::families::{
    big_q_jacobi, big_q_legendre, dual_q_krawtchouk, little_q_jacobi, monic_big_q_jacobi00, q_charlier,
    BigQJacobiParams, DualQKrawtchoukParams, MonicPath,
};
use qleg::{DoubleDouble, QBase, Real};
use serde::Serialize;

use crate::output::{Format, Sink};
use crate::{Common, Failure, Outcome, PrecisionArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `P̂_n(x; 0, 0, c, d; q)`; needs --c, --d, --q.
    #[value(name = "monic-big00")]
    MonicBig00,
    /// `P_n(x; a, b, c, d; q)`; needs --a, --b, --c, --d, --q.
    BigQJacobi,
    /// `P_n(x; 1, 1, c, d; q)`; needs --c, --d, --q.
    BigQLegendre,
    /// `p_n(x; a, b; q)`; needs --a, --b, --q.
    LittleQJacobi,
    /// `R_n(λ(x); s, N; q)` at lattice indices x; needs --s, --big-n, --q.
    DualQKrawtchouk,
    /// `c_n(x; a; q)`; needs --a, --q.
    QCharlier,
    /// `R_n^{(a,b)}(x)` with `R_n(1) = 1`; needs --a, --b.
    Jacobi,
    Legendre,
    /// `T_m(t)`; takes --m and --t as well as --n and --x.
    Chebyshev,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    family: Family,
    /// Degree.
    #[arg(long)]
    n: Option<usize>,
    /// Degree, for families indexed by m.
    #[arg(long)]
    m: Option<usize>,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Evaluation points for Chebyshev polynomials.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t: Vec<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    d: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    big_n: Option<usize>,
    /// Route for the monic family: series-c, series-d, recurrence or auto.
    #[arg(long, default_value = "auto")]
    path: MonicPath,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize)]
pub struct EvalRow {
    pub family: String,
    pub n: usize,
    pub x: f64,
    pub value: f64,
}

fn need<T>(v: Option<T>, flag: &str, family: Family) -> Result<T, Failure> {
    v.ok_or_else(|| {
        let name = family.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default();
        Failure::Usage(format!("{name} needs --{flag}"))
    })
}

fn value_at<R: Real>(args: &EvalArgs, n: usize, x: f64) -> Result<f64, Failure> {
    let f = args.family;
    let r = R::from_f64;
    let base = || -> Result<QBase<R>, Failure> { Ok(QBase::new(need(args.q, "q", f)?)?) };
    let v = match f {
        Family::MonicBig00 => {
            let (c, d) = (need(args.c, "c", f)?, need(args.d, "d", f)?);
            monic_big_q_jacobi00(n, r(x), r(c), r(d), &base()?, args.path)?
        }
        Family::BigQJacobi => {
            let params = BigQJacobiParams::new(
                r(need(args.a, "a", f)?),
                r(need(args.b, "b", f)?),
                r(need(args.c, "c", f)?),
                r(need(args.d, "d", f)?),
                base()?,
            );
            big_q_jacobi(n, r(x), &params)?
        }
        Family::BigQLegendre => big_q_legendre(n, r(x), r(need(args.c, "c", f)?), r(need(args.d, "d", f)?), &base()?)?,
        Family::LittleQJacobi => little_q_jacobi(n, r(x), r(need(args.a, "a", f)?), r(need(args.b, "b", f)?), &base()?)?,
        Family::DualQKrawtchouk => {
            if x < 0.0 || x.fract() != 0.0 {
                return Err(Failure::Usage(format!("lattice index {x} is not a nonnegative integer")));
            }
            let params = DualQKrawtchoukParams::new(r(need(args.s, "s", f)?), need(args.big_n, "big-n", f)?, base()?)?;
            dual_q_krawtchouk(n, x as usize, &params)?
        }
        Family::QCharlier => q_charlier(n, r(x), r(need(args.a, "a", f)?), &base()?)?,
        Family::Jacobi => jacobi_r(n, r(need(args.a, "a", f)?), r(need(args.b, "b", f)?), r(x)),
        Family::Legendre => legendre(n, r(x)),
        Family::Chebyshev => chebyshev_t(n, r(x)),
    };
    Ok(v.to_f64())
}

pub fn rows(args: &EvalArgs) -> Result<Vec<EvalRow>, Failure> {
    let f = args.family;
    let n = if f == Family::Chebyshev { args.m.or(args.n) } else { args.n.or(args.m) };
    let n = need(n, "n", f)?;
    let points = if f == Family::Chebyshev && !args.t.is_empty() { &args.t } else { &args.x };
    if points.is_empty() {
        return Err(Failure::Usage("no evaluation points; pass --x (or --t)".into()));
    }
    let name = f.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default();
    points
        .iter()
        .map(|&x| {
            let value = match args.common.precision {
                Some(PrecisionArg::Extended) => value_at::<DoubleDouble>(args, n, x)?,
                _ => value_at::<f64>(args, n, x)?,
            };
            Ok(EvalRow { family: name.clone(), n, x, value })
        })
        .collect()
}

pub fn run(args: EvalArgs) -> Outcome {
    let rows = rows(&args)?;
    let mut sink = Sink::open(args.common.output.as_deref())?;
    sink.eval(&rows, args.common.format.unwrap_or(Format::Csv))?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Wrap {
        #[command(flatten)]
        args: EvalArgs,
    }

    fn eval(argv: &[&str]) -> Result<Vec<EvalRow>, Failure> {
        let mut full = vec!["eval"];
        full.extend_from_slice(argv);
        rows(&Wrap::try_parse_from(full).unwrap().args)
    }

    #[test]
    fn little_degree_zero_is_one() {
        let r = eval(&["little-q-jacobi", "--n", "0", "--a", "0.3", "--b", "0.5", "--q", "0.4", "--x", "0.1,0.9"]).unwrap();
        assert!(r.iter().all(|row| row.value == 1.0));
    }

    #[test]
    fn monic_degree_one() {
        let r = eval(&["monic-big00", "--n", "1", "--c", "0.8", "--d", "0.2", "--q", "0.5", "--x", "0.3"]).unwrap();
        assert!((r[0].value + 0.3).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_takes_m_and_t() {
        let r = eval(&["chebyshev", "--m", "2", "--t", "0.6"]).unwrap();
        assert!((r[0].value + 0.28).abs() < 1e-15);
    }

    #[test]
    fn missing_parameter_is_a_usage_error() {
        let e = eval(&["big-q-legendre", "--n", "2", "--c", "1", "--q", "0.5", "--x", "0.1"]).unwrap_err();
        assert!(matches!(e, Failure::Usage(ref m) if m.contains("--d")), "{e}");
    }

    #[test]
    fn lattice_index_must_be_integral() {
        let e = eval(&["dual-q-krawtchouk", "--n", "1", "--s", "2", "--big-n", "4", "--q", "0.5", "--x", "1.5"]).unwrap_err();
        assert!(matches!(e, Failure::Usage(_)));
    }
}
