//! Evaluators for the q-orthogonal polynomial families.
//!
//! Each family is a terminating basic hypergeometric series. The monic
//! big q-Jacobi polynomials with `a = b = 0` can additionally be computed
//! from either of two series or from their three-term recurrence.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::poly::{chebyshev_nodes, max_relative_deviation, NewtonPoly};
use crate::qcore::{phi_terminating, QBase, QParam, SeriesSpec};
use crate::scalar::{CompensatedSum, Real};

/// Parameters of the big q-Jacobi polynomials `P_n(x; a, b, c, d; q)`.
#[derive(Debug, Clone, Copy)]
pub struct BigQJacobiParams<R> {
    pub a: QParam<R>,
    pub b: QParam<R>,
    pub c: R,
    pub d: R,
    pub base: QBase<R>,
}

impl<R: Real> BigQJacobiParams<R> {
    pub fn new(a: impl Into<QParam<R>>, b: impl Into<QParam<R>>, c: R, d: R, base: QBase<R>) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c,
            d,
            base,
        }
    }

    /// `a = b = 1`.
    pub fn legendre(c: R, d: R, base: QBase<R>) -> Self {
        Self::new(QParam::q_power(0), QParam::q_power(0), c, d, base)
    }

    /// Rejects non-positive `c` or `d`, as required by the orthogonality and
    /// addition entry points.
    pub fn require_positive(&self) -> Result<()> {
        require_positive_cd(self.c, self.d)
    }

    pub fn eval(&self, n: usize, x: R) -> Result<R> {
        big_q_jacobi(n, x, self)
    }
}

pub(crate) fn require_positive_cd<R: Real>(c: R, d: R) -> Result<()> {
    if !(c > R::zero() && d > R::zero()) {
        return Err(Error::invalid(format!(
            "c = {} and d = {} must both be positive",
            c.to_f64(),
            d.to_f64()
        )));
    }
    Ok(())
}

/// `P_n(x; a, b, c, d; q) = ₃φ₂(q^{-n}, abq^{n+1}, qax/c; qa, −qad/c; q, q)`.
pub fn big_q_jacobi<R: Real>(n: usize, x: R, p: &BigQJacobiParams<R>) -> Result<R> {
    if p.c.is_zero() {
        return Err(Error::invalid("big q-Jacobi needs c ≠ 0"));
    }
    let ab = p.a.mul(&p.b).shift(n as i64 + 1);
    let third = p.a.shift(1).scale(x / p.c);
    let den_a = p.a.shift(1);
    let den_d = p.a.shift(1).scale(-p.d / p.c);
    let spec = SeriesSpec::terminating(n, [ab, third], vec![den_a, den_d], p.base, p.base.q());
    phi_terminating(&spec)
}

/// `P_n(x; a, b, c, d; q)` from the three-term recurrence in `n`.
///
/// With `X = qax/c` and `γ = −ad/c` the polynomials satisfy
/// `(X − 1) P_n = A_n P_{n+1} − (A_n + C_n) P_n + C_n P_{n−1}` where
/// `A_n = (1 − aq^{n+1})(1 − abq^{n+1})(1 − γq^{n+1}) / ((1 − abq^{2n+1})(1 − abq^{2n+2}))` and
/// `C_n = −aγq^{n+1}(1 − q^n)(1 − abγ^{-1}q^n)(1 − bq^n) / ((1 − abq^{2n})(1 − abq^{2n+1}))`.
/// Near a zero of `P_n` this loses far fewer digits than the series.
pub fn big_q_jacobi_recurrence<R: Real>(n: usize, x: R, p: &BigQJacobiParams<R>) -> Result<R> {
    if p.c.is_zero() {
        return Err(Error::invalid("big q-Jacobi needs c ≠ 0"));
    }
    let base = &p.base;
    let a = p.a.eval(base);
    let b = p.b.eval(base);
    let ab = a * b;
    let gamma = -a * p.d / p.c;
    let big_x = base.q() * a * x / p.c;
    let one = R::one();
    let mut prev = R::zero();
    let mut cur = one;
    for k in 0..n {
        let ki = k as i64;
        let qk1 = base.pow(ki + 1);
        let a_k = (one - a * qk1) * (one - ab * qk1) * (one - gamma * qk1)
            / ((one - ab * base.pow(2 * ki + 1)) * (one - ab * base.pow(2 * ki + 2)));
        if a_k.is_zero() || !a_k.is_finite() {
            return Err(Error::domain(format!("recurrence coefficient A_{k} degenerates")));
        }
        let c_k = if k == 0 {
            R::zero()
        } else {
            let qk = base.pow(ki);
            -a * gamma * qk1 * (one - qk) * (one - ab / gamma * qk) * (one - b * qk)
                / ((one - ab * base.pow(2 * ki)) * (one - ab * base.pow(2 * ki + 1)))
        };
        let next = ((big_x - one) * cur + (a_k + c_k) * cur - c_k * prev) / a_k;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Big q-Legendre polynomial `P_n(x; 1, 1, c, d; q)`.
pub fn big_q_legendre<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>) -> Result<R> {
    big_q_jacobi(n, x, &BigQJacobiParams::legendre(c, d, *base))
}

/// Big q-Legendre polynomial from the recurrence.
pub fn big_q_legendre_recurrence<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>) -> Result<R> {
    big_q_jacobi_recurrence(n, x, &BigQJacobiParams::legendre(c, d, *base))
}

/// Computation route for the monic polynomials `P̂_n(x; 0, 0, c, d; q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonicPath {
    /// Series in `c/x` with argument `−qx/d`.
    SeriesC,
    /// Series in `−d/x` with argument `qx/c`.
    SeriesD,
    Recurrence,
    /// Recurrence everywhere; the series need `x ≠ 0`.
    #[default]
    Auto,
}

impl FromStr for MonicPath {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "series_c" | "series-c" => Ok(MonicPath::SeriesC),
            "series_d" | "series-d" => Ok(MonicPath::SeriesD),
            "recurrence" => Ok(MonicPath::Recurrence),
            "auto" => Ok(MonicPath::Auto),
            other => Err(format!("unknown path '{other}'")),
        }
    }
}

/// `P̂_n(x; 0, 0, c, d; q)` along the requested path.
pub fn monic_big_q_jacobi00<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>, path: MonicPath) -> Result<R> {
    match path {
        MonicPath::Recurrence | MonicPath::Auto => Ok(monic_recurrence(n, x, c, d, base)),
        MonicPath::SeriesC => {
            if x.is_zero() {
                return Err(Error::domain("series in c/x is undefined at x = 0"));
            }
            if d.is_zero() {
                return Err(Error::domain("series in c/x needs d ≠ 0"));
            }
            monic_series(n, x, c, d, base)
        }
        MonicPath::SeriesD => {
            if x.is_zero() {
                return Err(Error::domain("series in −d/x is undefined at x = 0"));
            }
            if c.is_zero() {
                return Err(Error::domain("series in −d/x needs c ≠ 0"));
            }
            // The second form is the first one with (c, d, x) → (−d, −c, x).
            monic_series(n, x, -d, -c, base)
        }
    }
}

/// `d^n q^{n(n−1)/2} ₂φ₁(q^{-n}, c/x; 0; q, −qx/d)`, summed with the factor
/// `(c/x; q)_k x^k = ∏_{j<k}(x − cq^j)` so no division by `x` occurs.
fn monic_series<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>) -> Result<R> {
    let q = base.q();
    let ni = n as i64;
    let mut sum = CompensatedSum::new();
    // term_k = d^{n−k} q^{n(n−1)/2} (q^{-n};q)_k/(q;q)_k (−q)^k ∏_{j<k}(x − cq^j)
    let mut term = d.powi(n as i32) * base.pow(ni * (ni - 1) / 2);
    sum.add(term);
    let mut qj = R::one();
    for k in 0..n {
        let kk = k as i64;
        let up = R::one() - base.pow(kk - ni);
        let down = R::one() - base.pow(kk + 1);
        term = term * up / down * (-q) * (x - c * qj) / d;
        qj *= q;
        sum.add(term);
    }
    Ok(sum.value())
}

/// Forward three-term recurrence for `P̂_n(x; 0, 0, c, d; q)`.
pub fn monic_recurrence<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>) -> R {
    monic_recurrence_table(n, x, c, d, base)[n]
}

/// All of `P̂_0(x), …, P̂_n(x)` from the recurrence.
pub fn monic_recurrence_table<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>) -> Vec<R> {
    let q = base.q();
    let mut out = Vec::with_capacity(n + 1);
    out.push(R::one());
    let mut qk = R::one();
    for k in 0..n {
        let next = if k == 0 {
            x - (c - d)
        } else {
            (x - qk * (c - d)) * out[k] - qk / q * c * d * (R::one() - qk) * out[k - 1]
        };
        out.push(next);
        qk *= q;
    }
    out
}

/// `p_n(x; a, b; q) = ₂φ₁(q^{-n}, q^{n+1}ab; qa; q, qx)`.
pub fn little_q_jacobi<R: Real>(
    n: usize,
    x: R,
    a: impl Into<QParam<R>>,
    b: impl Into<QParam<R>>,
    base: &QBase<R>,
) -> Result<R> {
    let a = a.into();
    let b = b.into();
    if x.is_zero() {
        return Ok(R::one());
    }
    let ab = a.mul(&b).shift(n as i64 + 1);
    let spec = SeriesSpec::terminating(n, [ab], vec![a.shift(1)], *base, base.q() * x);
    phi_terminating(&spec)
}

/// Parameters of the dual q-Krawtchouk polynomials `R_n(λ(x); s, N; q)`.
#[derive(Debug, Clone, Copy)]
pub struct DualQKrawtchoukParams<R> {
    pub s: R,
    pub big_n: usize,
    pub base: QBase<R>,
}

impl<R: Real> DualQKrawtchoukParams<R> {
    pub fn new(s: R, big_n: usize, base: QBase<R>) -> Result<Self> {
        if !(s > R::zero()) {
            return Err(Error::invalid(format!("s = {} must be positive", s.to_f64())));
        }
        Ok(Self { s, big_n, base })
    }

    /// Lattice point `λ(x) = q^{-x} − s^{-1} q^{x−N}`.
    pub fn lattice(&self, x: usize) -> R {
        self.base.pow(-(x as i64)) - self.base.pow(x as i64 - self.big_n as i64) / self.s
    }
}

/// `R_n(λ(x); s, N; q) = ₃φ₂(q^{-n}, q^{-x}, −s^{-1}q^{x−N}; q^{-N}, 0; q, q)`.
pub fn dual_q_krawtchouk<R: Real>(n: usize, x: usize, p: &DualQKrawtchoukParams<R>) -> Result<R> {
    let big_n = p.big_n;
    if n > big_n {
        return Err(Error::DegreeOutOfRange { n, max: big_n });
    }
    if x > big_n {
        return Err(Error::invalid(format!("lattice index {x} outside 0..={big_n}")));
    }
    let qx = QParam::q_power(-(x as i64));
    let third = QParam::new(-R::one() / p.s, x as i64 - big_n as i64);
    let spec = SeriesSpec::terminating(
        n,
        [qx, third],
        vec![QParam::q_power(-(big_n as i64)), QParam::zero()],
        p.base,
        p.base.q(),
    );
    phi_terminating(&spec)
}

/// `c_n(y; a; q) = ₂φ₁(q^{-n}, y; 0; q, −q^{n+1}/a)`.
pub fn q_charlier<R: Real>(n: usize, y: impl Into<QParam<R>>, a: R, base: &QBase<R>) -> Result<R> {
    if !(a > R::zero()) {
        return Err(Error::invalid(format!("q-Charlier parameter a = {} must be positive", a.to_f64())));
    }
    let z = -base.pow(n as i64 + 1) / a;
    let spec = SeriesSpec::terminating(n, [y.into()], vec![QParam::zero()], *base, z);
    phi_terminating(&spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyId {
    MonicBig00,
    BigQJacobi,
    LittleQJacobi,
    DualQKrawtchouk,
    QCharlier,
}

impl FamilyId {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyId::MonicBig00 => "monic-big00",
            FamilyId::BigQJacobi => "big-q-jacobi",
            FamilyId::LittleQJacobi => "little-q-jacobi",
            FamilyId::DualQKrawtchouk => "dual-q-krawtchouk",
            FamilyId::QCharlier => "q-charlier",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "monic-big00" | "monic_big00" | "monic" => Ok(FamilyId::MonicBig00),
            "big-q-jacobi" | "big_q_jacobi" | "big-q-legendre" => Ok(FamilyId::BigQJacobi),
            "little-q-jacobi" | "little_q_jacobi" => Ok(FamilyId::LittleQJacobi),
            "dual-q-krawtchouk" | "dual_q_krawtchouk" => Ok(FamilyId::DualQKrawtchouk),
            "q-charlier" | "q_charlier" => Ok(FamilyId::QCharlier),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

/// Parameters needed by [`leading_coefficient`].
#[derive(Debug, Clone, Copy)]
pub enum LeadingParams<R> {
    MonicBig00 { c: R, d: R, base: QBase<R> },
    BigQJacobi(BigQJacobiParams<R>),
    LittleQJacobi { a: QParam<R>, b: QParam<R>, base: QBase<R> },
}

/// Coefficient of `x^n` from an `(n+1)`-point Chebyshev fit on
/// `[−d − 0.5, c + 0.5]` (`[−0.5, 1.5]` for little q-Jacobi).
pub fn leading_coefficient<R: Real>(n: usize, params: &LeadingParams<R>, tolerance: f64) -> Result<R> {
    let half = R::from_f64(0.5);
    let (lo, hi) = match params {
        LeadingParams::MonicBig00 { c, d, .. } => (-*d - half, *c + half),
        LeadingParams::BigQJacobi(p) => (-p.d - half, p.c + half),
        LeadingParams::LittleQJacobi { .. } => (-half, R::from_f64(1.5)),
    };
    let mut err = None;
    let mut f = |x: R| -> R {
        let v = match params {
            LeadingParams::MonicBig00 { c, d, base } => Ok(monic_recurrence(n, x, *c, *d, base)),
            LeadingParams::BigQJacobi(p) => big_q_jacobi(n, x, p),
            LeadingParams::LittleQJacobi { a, b, base } => little_q_jacobi(n, x, *a, *b, base),
        };
        v.unwrap_or_else(|e| {
            err.get_or_insert(e);
            R::zero()
        })
    };
    let fit = NewtonPoly::sample(&mut f, n, lo, hi);
    let probes = chebyshev_nodes(n + 4, lo, hi);
    let residual = max_relative_deviation(&fit, &mut f, &probes);
    if let Some(e) = err {
        return Err(e);
    }
    if !(residual <= tolerance) {
        return Err(Error::IllConditioned { residual, tolerance });
    }
    Ok(fit.leading())
}
