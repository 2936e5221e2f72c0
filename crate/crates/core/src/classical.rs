//! Classical Jacobi, Legendre and Chebyshev polynomials and the `q ↑ 1`
//! limits of the q-families.
//!
//! Limits are taken along `q = r^{1/p}` for a fixed `r ∈ (0, 1)`. A scan
//! records the error at each `p` and passes when the errors decrease
//! strictly and the last one is below a cap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{
    big_q_jacobi, dual_q_krawtchouk, little_q_jacobi, monic_recurrence_table, BigQJacobiParams, DualQKrawtchoukParams,
};
use crate::identities::big00_weight;
use crate::qcore::{q_integral_from_zero, qpochhammer_infinite_many, QBase};
use crate::report::{IdentityId, ParamRecord, Precision, Truncation, VerificationReport};
use crate::scalar::{CompensatedSum, DoubleDouble, Real};

/// Above this base the scans switch to double-double.
pub const EXTENDED_ABOVE_Q: f64 = 0.99;

/// Jacobi polynomial normalised by `R_n^{(α,β)}(1) = 1`.
pub fn jacobi_r<R: Real>(n: usize, alpha: R, beta: R, x: R) -> R {
    let one = R::one();
    let two = R::from_f64(2.0);
    if n == 0 {
        return one;
    }
    let ab = alpha + beta;
    let mut prev = one;
    let mut cur = alpha + one + (ab + two) * (x - one) / two;
    for k in 1..n {
        let k = R::from_i64(k as i64);
        let s = two * k + ab;
        let a1 = two * (k + one) * (k + ab + one) * s;
        let a2 = (s + one) * (alpha * alpha - beta * beta);
        let a3 = s * (s + one) * (s + two);
        let a4 = two * (k + alpha) * (k + beta) * (s + two);
        let next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    // P_n(1) = (α+1)_n / n!
    let mut at_one = one;
    for k in 0..n {
        at_one = at_one * (alpha + R::from_i64(k as i64 + 1)) / R::from_i64(k as i64 + 1);
    }
    cur / at_one
}

pub fn legendre<R: Real>(n: usize, x: R) -> R {
    jacobi_r(n, R::zero(), R::zero(), x)
}

/// `T_m(t)` with `T_m(cos θ) = cos mθ`.
pub fn chebyshev_t<R: Real>(m: usize, t: R) -> R {
    let (mut a, mut b) = (R::one(), t);
    if m == 0 {
        return a;
    }
    let two = R::from_f64(2.0);
    for _ in 1..m {
        let c = two * t * b - a;
        a = b;
        b = c;
    }
    b
}

/// `cos θ` for `θ ∈ [0, π]`, to the full precision of `R`.
fn cos_on_half_turn<R: Real>(theta: R) -> R {
    // cos θ = −sin(θ − π/2) with |θ − π/2| ≤ π/2
    let u = theta - R::pi() / R::from_f64(2.0);
    let u2 = u * u;
    let mut term = u;
    let mut sum = u;
    let mut k = 1;
    while term.abs().to_f64() > 1e-40 && k < 40 {
        term = -term * u2 / R::from_i64((2 * k) * (2 * k + 1));
        sum += term;
        k += 1;
    }
    -sum
}

/// Gauss–Chebyshev nodes `cos((2j − 1)π / 2n)`, `j = 1..n`.
fn chebyshev_gauss_nodes<R: Real>(n: usize) -> Vec<R> {
    (1..=n)
        .map(|j| cos_on_half_turn(R::pi() * R::from_i64(2 * j as i64 - 1) / R::from_i64(2 * n as i64)))
        .collect()
}

/// `ρ(x) = x + √(x² − 1)` on the branch with `|ρ| > 1` off `[−1, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RhoMap;

impl RhoMap {
    pub fn eval<R: Real>(&self, x: R) -> Result<R> {
        if x.abs() <= R::one() {
            return Err(Error::domain(format!("ρ is complex for x = {} in [−1, 1]", x.to_f64())));
        }
        let root = (x * x - R::one()).sqrt();
        Ok(if x > R::zero() { x + root } else { x - root })
    }

    /// `ρ(x)^{−1} = x − √(x² − 1)` on the same branch.
    pub fn inverse<R: Real>(&self, x: R) -> Result<R> {
        Ok(R::one() / self.eval(x)?)
    }
}

/// `q = r^{1/p}` computed in `R`.
fn base_for<R: Real>(r: f64, p: u32) -> Result<QBase<R>> {
    QBase::from_real(R::from_f64(r).powf(R::one() / R::from_i64(p as i64)))
}

fn needs_extended(r: f64, p: u32) -> bool {
    r.powf(1.0 / p as f64) > EXTENDED_ABOVE_Q
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitScanConfig {
    pub r: f64,
    pub p_values: Vec<u32>,
    /// Largest acceptable error at the last `p`.
    pub cap: f64,
}

impl LimitScanConfig {
    pub fn new(r: f64, p_values: Vec<u32>, cap: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid(format!("r = {r} must lie in (0, 1)")));
        }
        if p_values.is_empty() || p_values[0] == 0 || p_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("p values must be positive and strictly increasing"));
        }
        if !(cap > 0.0) {
            return Err(Error::invalid("cap must be positive"));
        }
        Ok(Self { r, p_values, cap })
    }
}

impl Default for LimitScanConfig {
    fn default() -> Self {
        Self {
            r: 0.5,
            p_values: vec![4, 8, 16, 32],
            cap: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: u32,
    pub q: f64,
    /// Probe point of the worst error, when the compared quantity depends on one.
    pub probe: Option<f64>,
    pub q_value: f64,
    pub limit_value: f64,
    pub abs_error: f64,
    pub precision: Precision,
}

/// Errors along a scan in `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub identity_id: IdentityId,
    pub params: ParamRecord,
    pub rows: Vec<ScanRow>,
}

impl ErrorTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error)
    }

    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.abs_error)
    }

    pub fn report(&self, cap: f64) -> VerificationReport {
        let last = self.rows.last().expect("scan has rows");
        let mut params = self.params.clone();
        params.set("p_max", last.p as usize);
        VerificationReport::bound(
            self.identity_id,
            params,
            last.q_value,
            last.limit_value,
            last.abs_error,
            last.limit_value.abs().max(1.0),
            cap,
            Truncation::new(last.precision).monotone(self.strictly_decreasing()),
        )
    }
}

/// A q-family with its classical limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitFamily {
    /// `P_n(x; q^α, q^β, c, d; q) → R_n^{(α,β)}((2x + d − c)/(c + d))`.
    BigQJacobi { n: usize, alpha: f64, beta: f64, c: f64, d: f64 },
    /// `p_n(x; q^α, q^β; q) → R_n^{(α,β)}(1 − 2x)`.
    LittleQJacobi { n: usize, alpha: f64, beta: f64 },
    /// `R_{l−m}(q^{−l} − (d/c) q^{−l}; c/d, 2l; q) → (m+1)_{l−m}/(l+m+1)_{l−m} (1 + d/c)^{l−m} R_{l−m}^{(m,m)}((c − d)/(c + d))`.
    DualQKrawtchouk { l: usize, m: usize, c: f64, d: f64 },
}

impl LimitFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            LimitFamily::BigQJacobi { alpha, beta, c, d, .. } => {
                if !(alpha > -1.0 && beta > -1.0 && c > 0.0 && d > 0.0) {
                    return Err(Error::invalid("need α, β > −1 and c, d > 0"));
                }
            }
            LimitFamily::LittleQJacobi { alpha, beta, .. } => {
                if !(alpha > -1.0 && beta > -1.0) {
                    return Err(Error::invalid("need α, β > −1"));
                }
            }
            LimitFamily::DualQKrawtchouk { l, m, c, d } => {
                if m > l || !(c > 0.0 && d > 0.0) {
                    return Err(Error::invalid("need m ≤ l and c, d > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn identity_id(&self) -> IdentityId {
        match self {
            LimitFamily::BigQJacobi { .. } => IdentityId::LimitBigQJacobi,
            LimitFamily::LittleQJacobi { .. } => IdentityId::LimitLittleQJacobi,
            LimitFamily::DualQKrawtchouk { .. } => IdentityId::LimitDualKrawtchouk,
        }
    }

    pub fn record(&self) -> ParamRecord {
        match *self {
            LimitFamily::BigQJacobi { n, alpha, beta, c, d } => ParamRecord::new()
                .with("family", "big-q-jacobi")
                .with("n", n)
                .with("alpha", alpha)
                .with("beta", beta)
                .with("c", c)
                .with("d", d),
            LimitFamily::LittleQJacobi { n, alpha, beta } => ParamRecord::new()
                .with("family", "little-q-jacobi")
                .with("n", n)
                .with("alpha", alpha)
                .with("beta", beta),
            LimitFamily::DualQKrawtchouk { l, m, c, d } => ParamRecord::new()
                .with("family", "dual-q-krawtchouk")
                .with("l", l)
                .with("m", m)
                .with("c", c)
                .with("d", d),
        }
    }

    /// Probe points; empty for the dual q-Krawtchouk case, which is a number.
    pub fn probes(&self) -> Vec<f64> {
        match *self {
            LimitFamily::BigQJacobi { c, d, .. } => (1..=5).map(|j| -d + (c + d) * j as f64 / 6.0).collect(),
            LimitFamily::LittleQJacobi { .. } => vec![0.1, 0.3, 0.5, 0.7, 0.9],
            LimitFamily::DualQKrawtchouk { .. } => vec![0.0],
        }
    }

    fn has_probe(&self) -> bool {
        !matches!(self, LimitFamily::DualQKrawtchouk { .. })
    }

    /// The classical value at a probe.
    pub fn limit(&self, x: f64) -> f64 {
        match *self {
            LimitFamily::BigQJacobi { n, alpha, beta, c, d } => jacobi_r(n, alpha, beta, (2.0 * x + d - c) / (c + d)),
            LimitFamily::LittleQJacobi { n, alpha, beta } => jacobi_r(n, alpha, beta, 1.0 - 2.0 * x),
            LimitFamily::DualQKrawtchouk { l, m, c, d } => {
                let k = l - m;
                let mut ratio = 1.0;
                for j in 0..k {
                    ratio *= (m + 1 + j) as f64 / (l + m + 1 + j) as f64;
                }
                ratio * (1.0 + d / c).powi(k as i32) * jacobi_r(k, m as f64, m as f64, (c - d) / (c + d))
            }
        }
    }

    /// The q-family value at a probe for base `q = r^{1/p}`.
    pub fn at_q<R: Real>(&self, x: f64, base: &QBase<R>) -> Result<R> {
        let q = base.q();
        let f = R::from_f64;
        match *self {
            LimitFamily::BigQJacobi { n, alpha, beta, c, d } => {
                let params = BigQJacobiParams::new(q.powf(f(alpha)), q.powf(f(beta)), f(c), f(d), *base);
                big_q_jacobi(n, f(x), &params)
            }
            LimitFamily::LittleQJacobi { n, alpha, beta } => {
                little_q_jacobi(n, f(x), q.powf(f(alpha)), q.powf(f(beta)), base)
            }
            LimitFamily::DualQKrawtchouk { l, m, c, d } => {
                let params = DualQKrawtchoukParams::new(f(c) / f(d), 2 * l, *base)?;
                dual_q_krawtchouk(l - m, l, &params)
            }
        }
    }
}

/// Scans `max_x |q-family − limit|` over the probe grid along `cfg.p_values`.
pub fn limit_family_scan(cfg: &LimitScanConfig, family: &LimitFamily) -> Result<ErrorTable> {
    family.validate()?;
    let mut rows = Vec::with_capacity(cfg.p_values.len());
    for &p in &cfg.p_values {
        let extended = needs_extended(cfg.r, p);
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
        for x in family.probes() {
            let value = if extended {
                family.at_q(x, &base_for::<DoubleDouble>(cfg.r, p)?)?.to_f64()
            } else {
                family.at_q(x, &base_for::<f64>(cfg.r, p)?)?
            };
            let lim = family.limit(x);
            let err = (value - lim).abs();
            if err > worst.0 {
                worst = (err, value, lim, x);
            }
        }
        rows.push(ScanRow {
            p,
            q: cfg.r.powf(1.0 / p as f64),
            probe: family.has_probe().then_some(worst.3),
            q_value: worst.1,
            limit_value: worst.2,
            abs_error: worst.0,
            precision: if extended { Precision::Extended } else { Precision::Double },
        });
    }
    Ok(ErrorTable {
        identity_id: family.identity_id(),
        params: family.record().with("r", cfg.r),
        rows,
    })
}

/// `(cdr(1−r))^{m/2} ρ^m((x − r(c − d)) / 2√(rcd(1−r)))`.
pub fn ratio_target(m: i64, x: f64, r: f64, c: f64, d: f64) -> Result<f64> {
    let cdr = c * d * r * (1.0 - r);
    let rho = RhoMap.eval((x - r * (c - d)) / (2.0 * cdr.sqrt()))?;
    Ok(cdr.powf(m as f64 / 2.0) * rho.powi(m as i32))
}

/// `P̂_{p+m}(x)/P̂_p(x)` for the monic big q-Jacobi polynomials with
/// `a = b = 0`, `q = r^{1/p}`, against its limit.
pub fn ratio_asymptotic(m: i64, x: f64, r: f64, c: f64, d: f64, cfg: &LimitScanConfig) -> Result<ErrorTable> {
    if !(c > 0.0 && d > 0.0) {
        return Err(Error::invalid("c, d must be positive"));
    }
    if (-d..=c).contains(&x) {
        return Err(Error::domain(format!("x = {x} lies in [−d, c] = [{}, {c}]", -d)));
    }
    let target = ratio_target(m, x, r, c, d)?;
    let mut rows = Vec::with_capacity(cfg.p_values.len());
    for &p in &cfg.p_values {
        let top = p as i64 + m;
        if top < 0 {
            return Err(Error::invalid(format!("p + m = {top} is negative")));
        }
        let extended = needs_extended(r, p);
        let ratio = if extended {
            monic_ratio::<DoubleDouble>(p as usize, top as usize, x, c, d, r, p)?
        } else {
            monic_ratio::<f64>(p as usize, top as usize, x, c, d, r, p)?
        };
        rows.push(ScanRow {
            p,
            q: r.powf(1.0 / p as f64),
            probe: Some(x),
            q_value: ratio,
            limit_value: target,
            abs_error: (ratio - target).abs(),
            precision: if extended { Precision::Extended } else { Precision::Double },
        });
    }
    Ok(ErrorTable {
        identity_id: IdentityId::RatioAsymptotic,
        params: ParamRecord::new()
            .with("m", m)
            .with("x", x)
            .with("r", r)
            .with("c", c)
            .with("d", d),
        rows,
    })
}

fn monic_ratio<R: Real>(den: usize, num: usize, x: f64, c: f64, d: f64, r: f64, p: u32) -> Result<f64> {
    let base = base_for::<R>(r, p)?;
    let t = monic_recurrence_table(den.max(num), R::from_f64(x), R::from_f64(c), R::from_f64(d), &base);
    if t[den].abs().to_f64() <= f64::MIN_POSITIVE || !t[den].is_finite() {
        return Err(Error::DegenerateRatio { x });
    }
    Ok((t[num] / t[den]).to_f64())
}

/// `R_l(xy + t√((1−x²)(1−y²)))` against the expansion in `T_m(t)`.
pub fn classical_addition_sides<R: Real>(l: usize, x: R, y: R, t: R) -> (R, R) {
    let one = R::one();
    let s = ((one - x * x) * (one - y * y)).sqrt();
    let lhs = legendre(l, x * y + t * s);
    let mut rhs = CompensatedSum::new();
    rhs.add(legendre(l, x) * legendre(l, y));
    let mut coef = one; // (l+m)!/((l−m)!(m!)²) 2^{−2m}
    for m in 1..=l {
        coef = coef * R::from_i64(((l + m) * (l - m + 1)) as i64) / R::from_i64((4 * m * m) as i64);
        let mm = R::from_i64(m as i64);
        let term = coef * s.powi(m as i32) * jacobi_r(l - m, mm, mm, x) * jacobi_r(l - m, mm, mm, y) * chebyshev_t(m, t);
        rhs.add(R::from_f64(2.0) * term);
    }
    (lhs, rhs.value())
}

fn check_unit_interval(name: &str, v: f64, closed: bool) -> Result<()> {
    let ok = if closed { (-1.0..=1.0).contains(&v) } else { v > -1.0 && v < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} outside the allowed interval")))
    }
}

/// Both sides are bounded by 1 on the domain, so residuals are absolute.
pub fn classical_addition(l: usize, x: f64, y: f64, t: f64, tolerance: f64) -> Result<VerificationReport> {
    check_unit_interval("x", x, false)?;
    check_unit_interval("y", y, false)?;
    check_unit_interval("t", t, true)?;
    let (lhs, rhs) = classical_addition_sides(l, x, y, t);
    Ok(VerificationReport::compare_scaled(
        IdentityId::ClassicalAddition,
        ParamRecord::new().with("l", l).with("x", x).with("y", y).with("t", t),
        lhs,
        rhs,
        1.0,
        tolerance,
        Truncation::new(Precision::Double).series_terms(l + 1),
    ))
}

/// The addition formula in the `(x, c, d, r)` parametrisation, with the
/// `m = 0` term `R_l((d − c)/(c + d)) R_l(1 − 2r)`. Also checks that it is
/// the `(x, y, t)` form under `x ↦ (d−c)/(c+d)`, `y ↦ 1 − 2r`,
/// `t ↦ (x − r(c−d)) / 2√(rcd(1−r))`.
pub fn classical_addition_parametrized(
    l: usize,
    x: f64,
    c: f64,
    d: f64,
    r: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    if !(c > 0.0 && d > 0.0 && r > 0.0 && r < 1.0) {
        return Err(Error::invalid("need c, d > 0 and r in (0, 1)"));
    }
    // Off [−d, c] the argument of T_m is large and the terms cancel, so the
    // sums are formed in double-double.
    type D = DoubleDouble;
    let one = D::one();
    let (xd, cd, dd, rd) = (D::from_f64(x), D::from_f64(c), D::from_f64(d), D::from_f64(r));
    let lhs = legendre(l, (D::from_f64(2.0) * xd + dd - cd) / (cd + dd));
    let xx = (dd - cd) / (cd + dd);
    let yy = one - D::from_f64(2.0) * rd;
    let t = (xd - rd * (cd - dd)) / (D::from_f64(2.0) * (rd * cd * dd * (one - rd)).sqrt());
    let mut rhs = CompensatedSum::new();
    rhs.add(legendre(l, xx) * legendre(l, yy));
    let mut coef = one; // (l+m)!/((l−m)!(m!)²)
    let ratio = dd / cd;
    for m in 1..=l {
        coef = coef * D::from_i64(((l + m) * (l - m + 1)) as i64) / D::from_i64((m * m) as i64);
        let mm = D::from_i64(m as i64);
        rhs.add(
            D::from_f64(2.0)
                * coef
                * (one + ratio).powi(-(m as i32))
                * (ratio * rd * (one - rd)).sqrt().powi(m as i32)
                * jacobi_r(l - m, mm, mm, xx)
                * jacobi_r(l - m, mm, mm, yy)
                * chebyshev_t(m, t),
        );
    }
    let rhs = rhs.value();
    let (lhs8, rhs8) = classical_addition_sides(l, xx, yy, t);
    let scale = lhs.abs().max(rhs.abs()).max(one);
    let dev = (lhs - rhs).abs().max((lhs - lhs8).abs()).max((rhs - rhs8).abs()).to_f64();
    let scale = scale.to_f64();
    Ok(VerificationReport::from_residuals(
        IdentityId::ClassicalAdditionParametrized,
        ParamRecord::new()
            .with("l", l)
            .with("x", x)
            .with("c", c)
            .with("d", d)
            .with("r", r),
        lhs.to_f64(),
        rhs.to_f64(),
        dev,
        dev / scale,
        tolerance,
        Truncation::new(Precision::Extended).series_terms(l + 1),
    ))
}

/// Both sides of the product formula; the integral over `t` is done by
/// Gauss–Chebyshev quadrature with `l + m + 4` nodes, exact for the
/// polynomial integrand.
pub fn classical_product_sides<R: Real>(l: usize, m: usize, x: R, y: R) -> (R, R) {
    let one = R::one();
    let mm = R::from_i64(m as i64);
    let lhs = jacobi_r(l - m, mm, mm, x) * jacobi_r(l - m, mm, mm, y);
    let s = ((one - x * x) * (one - y * y)).sqrt();
    let n = l + m + 4;
    let mut sum = CompensatedSum::new();
    for t in chebyshev_gauss_nodes::<R>(n) {
        sum.add(legendre(l, x * y + t * s) * chebyshev_t(m, t));
    }
    let integral = R::pi() / R::from_i64(n as i64) * sum.value();
    // 2^{2m} (l−m)! (m!)² / (l+m)!
    let mut coef = one;
    for j in 1..=m {
        coef = coef * R::from_i64((4 * j * j) as i64) / R::from_i64(((l - m + j) * (l + j)) as i64);
    }
    let rhs = coef / R::pi() * integral / s.powi(m as i32);
    (lhs, rhs)
}

/// The integral side divides by `((1−x²)(1−y²))^{m/2}`, so the sides are
/// formed in double-double to keep full double accuracy near `±1`.
pub fn classical_product(l: usize, m: usize, x: f64, y: f64, tolerance: f64) -> Result<VerificationReport> {
    if m > l {
        return Err(Error::invalid(format!("m = {m} exceeds l = {l}")));
    }
    check_unit_interval("x", x, false)?;
    check_unit_interval("y", y, false)?;
    let (lhs, rhs) = classical_product_sides(l, m, DoubleDouble::from_f64(x), DoubleDouble::from_f64(y));
    Ok(VerificationReport::compare_scaled(
        IdentityId::ClassicalProduct,
        ParamRecord::new().with("l", l).with("m", m).with("x", x).with("y", y),
        lhs,
        rhs,
        1.0,
        tolerance,
        Truncation::new(Precision::Extended).integral_terms(l + m + 4),
    ))
}

/// Polynomial test function given by monomial coefficients, lowest first.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPolynomial(pub Vec<f64>);

impl TestPolynomial {
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval<R: Real>(&self, z: R) -> R {
        self.0.iter().rev().fold(R::zero(), |acc, &c| acc * z + R::from_f64(c))
    }
}

/// Coefficients `(a_k, b_k) = (q^{(k−1)/2} √(cd(1 − q^k)), q^k (c − d))` of
/// the symmetric recurrence for the orthonormal polynomials below.
pub fn orthonormal_recurrence_coefficients<R: Real>(k: usize, c: R, d: R, base: &QBase<R>) -> (R, R) {
    let qk = base.pow(k as i64);
    let a = base.q().powf(R::from_f64((k as f64 - 1.0) / 2.0)) * (c * d * (R::one() - qk)).sqrt();
    (a, qk * (c - d))
}

/// Orthonormal big q-Jacobi polynomials with `a = b = 0` at `x`, degrees
/// `0..=n`, from `x p_k = a_{k+1} p_{k+1} + b_k p_k + a_k p_{k−1}` with
/// `p_0 = ((1−q) c (q, −d/c, −qc/d; q)_∞)^{−1/2}`.
pub fn orthonormal_big00<R: Real>(n: usize, x: R, c: R, d: R, base: &QBase<R>) -> Result<Vec<R>> {
    let q = base.q();
    let mass = (R::one() - q) * c * qpochhammer_infinite_many(&[q, -d / c, -q * c / d], base)?;
    let a = |k: usize| -> R { orthonormal_recurrence_coefficients(k, c, d, base).0 };
    let mut out = Vec::with_capacity(n + 1);
    out.push(R::one() / mass.sqrt());
    let mut prev = R::zero();
    for k in 0..n {
        let cur = out[k];
        let next = ((x - base.pow(k as i64) * (c - d)) * cur - if k > 0 { a(k) * prev } else { R::zero() }) / a(k + 1);
        prev = cur;
        out.push(next);
    }
    Ok(out)
}

fn kernel_lhs<R: Real>(f: &TestPolynomial, p: usize, m: i64, c: f64, d: f64, base: &QBase<R>) -> Result<(f64, usize)> {
    let (c, d) = (R::from_f64(c), R::from_f64(d));
    let top = (p as i64 + m) as usize;
    let mut g = |z: R| -> R {
        let ps = match orthonormal_big00(p.max(top), z, c, d, base) {
            Ok(v) => v,
            Err(_) => return R::from_f64(f64::NAN),
        };
        let w = big00_weight(z, c, d, base).unwrap_or_else(|_| R::from_f64(f64::NAN));
        f.eval(z) * ps[p] * ps[top] * w
    };
    let tail = 1e-3 * R::EPSILON;
    let (upper, tu) = q_integral_from_zero(&mut g, c, base, tail, 5)?;
    let (lower, tl) = q_integral_from_zero(&mut g, -d, base, tail, 5)?;
    let v = (upper - lower).to_f64();
    if !v.is_finite() {
        return Err(Error::NonConvergence { what: "kernel pairing".into(), terms: tu + tl });
    }
    Ok((v, tu + tl))
}

/// `(1/π) ∫ f(z) T_m((z − B)/2A) / √(4A² − (z − B)²) dz` over
/// `[B − 2A, B + 2A]`, by Gauss–Chebyshev quadrature.
pub fn arcsine_pairing(f: &TestPolynomial, m: i64, a: f64, b: f64) -> f64 {
    let k = m.unsigned_abs() as usize;
    let n = f.degree() + k + 2;
    let nodes = chebyshev_gauss_nodes::<f64>(n);
    nodes.iter().map(|&t| f.eval(b + 2.0 * a * t) * chebyshev_t(k, t)).sum::<f64>() / n as f64
}

/// The pairing `∫ f p_p p_{p+m} dμ_p` over `[−d, c]` against its
/// arcsine-kernel limit with `A = √(rcd(1−r))`, `B = r(c − d)`.
pub fn kernel_limit_scan(
    f: &TestPolynomial,
    m: i64,
    c: f64,
    d: f64,
    cfg: &LimitScanConfig,
) -> Result<ErrorTable> {
    if !(c > 0.0 && d > 0.0) {
        return Err(Error::invalid("c, d must be positive"));
    }
    let r = cfg.r;
    let a = (r * c * d * (1.0 - r)).sqrt();
    let b = r * (c - d);
    let rhs = arcsine_pairing(f, m, a, b);
    let mut rows = Vec::with_capacity(cfg.p_values.len());
    for &p in &cfg.p_values {
        if p as i64 + m < 0 {
            return Err(Error::invalid(format!("p + m = {} is negative", p as i64 + m)));
        }
        let extended = needs_extended(r, p);
        let (lhs, _) = if extended {
            kernel_lhs(f, p as usize, m, c, d, &base_for::<DoubleDouble>(r, p)?)?
        } else {
            kernel_lhs(f, p as usize, m, c, d, &base_for::<f64>(r, p)?)?
        };
        rows.push(ScanRow {
            p,
            q: r.powf(1.0 / p as f64),
            probe: None,
            q_value: lhs,
            limit_value: rhs,
            abs_error: (lhs - rhs).abs(),
            precision: if extended { Precision::Extended } else { Precision::Double },
        });
    }
    let coeffs = f.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    Ok(ErrorTable {
        identity_id: IdentityId::KernelLimit,
        params: ParamRecord::new()
            .with("f", coeffs)
            .with("m", m)
            .with("r", r)
            .with("c", c)
            .with("d", d),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::monic_big_q_jacobi00;
    use crate::families::MonicPath;
    use crate::identities::big00_norm;

    /// `₂F₁(−n, n+α+β+1; α+1; (1−x)/2)`, summed in double-double since the
    /// terms alternate and grow near `x = −1`.
    fn jacobi_series(n: usize, a: f64, b: f64, x: f64) -> f64 {
        let dd = DoubleDouble::from_f64;
        let z = (dd(1.0) - dd(x)) / dd(2.0);
        let (mut term, mut sum) = (dd(1.0), dd(1.0));
        for k in 0..n {
            let k = k as f64;
            term = term * dd(k - n as f64) * dd(k + n as f64 + a + b + 1.0) / (dd(k + a + 1.0) * dd(k + 1.0)) * z;
            sum += term;
        }
        sum.to_f64()
    }

    #[test]
    fn jacobi_examples() {
        for n in 0..8 {
            assert!((jacobi_r(n, 0.7, -0.3, 1.0) - 1.0).abs() < 1e-14);
        }
        assert!((legendre(2, 0.0) + 0.5).abs() < 1e-16);
        assert!((jacobi_r(4, 2.0, 2.0, 0.3) - jacobi_series(4, 2.0, 2.0, 0.3)).abs() < 1e-14);
        for n in 0..12 {
            for &x in &[-0.9, -0.2, 0.45, 0.99] {
                let want = jacobi_series(n, 1.5, 0.25, x);
                assert!((jacobi_r(n, 1.5, 0.25, x) - want).abs() < 1e-12 * want.abs().max(1.0), "n={n} x={x} {} {want}", jacobi_r(n, 1.5, 0.25, x));
            }
        }
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_t(0, 0.3), 1.0);
        assert!((chebyshev_t(2, 0.6) + 0.28).abs() < 1e-15);
        assert!((chebyshev_t(5, 0.7f64.cos()) - 3.5f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn double_double_cosine() {
        let v = cos_on_half_turn(DoubleDouble::pi() / DoubleDouble::from_f64(3.0));
        assert!((v - DoubleDouble::from_f64(0.5)).abs().to_f64() < 1e-30);
        assert!((cos_on_half_turn(0.4f64) - 0.4f64.cos()).abs() < 1e-15, "{}", cos_on_half_turn(0.4f64) - 0.4f64.cos());
    }

    #[test]
    fn rho_branch() {
        for &x in &[1.5, -2.0, 7.0, -1.01] {
            let r = RhoMap.eval(x).unwrap();
            assert!(r.abs() > 1.0);
            assert!((r * RhoMap.inverse(x).unwrap() - 1.0).abs() < 1e-15);
            assert!((0.5 * (r + 1.0 / r) - x).abs() < 1e-14);
        }
        assert!(RhoMap.eval(0.3).is_err());
    }

    #[test]
    fn scan_config_validation() {
        assert!(LimitScanConfig::new(1.0, vec![4, 8], 0.1).is_err());
        assert!(LimitScanConfig::new(0.5, vec![8, 4], 0.1).is_err());
        assert!(LimitScanConfig::new(0.5, vec![4, 8], 0.1).is_ok());
    }

    #[test]
    fn big_degree_zero_is_exact() {
        let fam = LimitFamily::BigQJacobi { n: 0, alpha: 0.0, beta: 0.0, c: 1.0, d: 0.5 };
        let t = limit_family_scan(&LimitScanConfig::default(), &fam).unwrap();
        assert!(t.rows.iter().all(|r| r.abs_error == 0.0));
    }

    #[test]
    fn little_degree_one_rate() {
        let fam = LimitFamily::LittleQJacobi { n: 1, alpha: 0.0, beta: 0.0 };
        let t = limit_family_scan(&LimitScanConfig::default(), &fam).unwrap();
        for row in &t.rows {
            assert!((row.abs_error - (1.0 - row.q) * 0.9).abs() < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn limit_scans_decrease() {
        let cfg = LimitScanConfig::default();
        for fam in [
            LimitFamily::BigQJacobi { n: 3, alpha: 0.0, beta: 0.0, c: 1.0, d: 0.5 },
            LimitFamily::LittleQJacobi { n: 3, alpha: 2.0, beta: 1.0 },
            LimitFamily::DualQKrawtchouk { l: 2, m: 1, c: 1.0, d: 0.5 },
            LimitFamily::DualQKrawtchouk { l: 4, m: 0, c: 0.7, d: 1.3 },
        ] {
            let t = limit_family_scan(&cfg, &fam).unwrap();
            let rep = t.report(cfg.cap);
            assert!(rep.passed, "{rep} {:?}", t.rows);
        }
    }

    #[test]
    fn dual_limit_matches_reference() {
        let fam = LimitFamily::DualQKrawtchouk { l: 2, m: 1, c: 1.0, d: 0.5 };
        assert!((fam.limit(0.0) - 0.25).abs() < 1e-15);
        let base = QBase::<f64>::new(0.5f64.powf(0.25)).unwrap();
        assert!((fam.at_q(0.0, &base).unwrap() - 0.292_893_218_813_452_5).abs() < 1e-14);
    }

    #[test]
    fn extended_switch() {
        let cfg = LimitScanConfig::new(0.9, vec![4, 16], 1.0).unwrap();
        let fam = LimitFamily::LittleQJacobi { n: 2, alpha: 0.5, beta: 0.5 };
        let t = limit_family_scan(&cfg, &fam).unwrap();
        assert_eq!(t.rows[0].precision, Precision::Double);
        assert_eq!(t.rows[1].precision, Precision::Extended);
    }

    #[test]
    fn ratio_examples() {
        let cfg = LimitScanConfig::new(0.5, vec![8, 16, 32, 64], 0.05).unwrap();
        let t = ratio_asymptotic(1, 2.0, 0.5, 1.0, 1.0, &cfg).unwrap();
        assert!(t.report(0.05).passed, "{:?}", t.rows);
        let t0 = ratio_asymptotic(0, 2.0, 0.5, 1.0, 1.0, &cfg).unwrap();
        assert!(t0.rows.iter().all(|r| r.abs_error == 0.0 && r.limit_value == 1.0));
        let up = ratio_target(1, 2.0, 0.5, 1.0, 1.0).unwrap();
        let down = ratio_target(-1, 2.0, 0.5, 1.0, 1.0).unwrap();
        assert!((up * down - 1.0).abs() < 1e-15);
        assert!(ratio_asymptotic(1, 0.5, 0.5, 1.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn classical_addition_examples() {
        let (a, b) = classical_addition_sides(0, 0.3, 0.2, 0.1);
        assert_eq!((a, b), (1.0, 1.0));
        let (a, b) = classical_addition_sides(6, 0.4, 0.4, 1.0);
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-13, "{a} {b}");
        assert!(classical_addition(5, 0.3, -0.6, 0.25, 1e-12).unwrap().passed);
    }

    #[test]
    fn parametrized_addition() {
        for l in 0..6 {
            let rep = classical_addition_parametrized(l, 0.2, 0.8, 0.5, 0.3, 1e-12).unwrap();
            assert!(rep.passed, "{rep}");
        }
    }

    #[test]
    fn classical_product_examples() {
        let (a, b) = classical_product_sides(0, 0, 0.5, -0.3);
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-14);
        let (a, b) = classical_product_sides(3, 3, 0.5f64, -0.3);
        assert_eq!(a, 1.0);
        assert!((b - 1.0).abs() < 1e-13);
        assert!(classical_product(4, 2, 0.5, -0.3, 1e-12).unwrap().passed);
        assert!(classical_product(8, 8, 0.97, -0.95, 1e-12).unwrap().passed);
    }

    #[test]
    fn orthonormal_matches_normalised_monic() {
        let base = QBase::new(0.6).unwrap();
        let (c, d, x) = (1.0, 0.5, 0.37);
        let ps = orthonormal_big00(6, x, c, d, &base).unwrap();
        for (k, &p) in ps.iter().enumerate() {
            let monic = monic_big_q_jacobi00(k, x, c, d, &base, MonicPath::SeriesC).unwrap();
            let want = monic / big00_norm(k, c, d, &base).unwrap().sqrt();
            assert!((p - want).abs() < 1e-12 * want.abs().max(1.0), "k={k} {p} {want}");
        }
    }

    #[test]
    fn arcsine_pairing_values() {
        let one = TestPolynomial(vec![1.0]);
        assert!((arcsine_pairing(&one, 0, 0.3, 0.1) - 1.0).abs() < 1e-15);
        assert!(arcsine_pairing(&one, 2, 0.3, 0.1).abs() < 1e-15);
        // z T_1: (1/π)∫ (B + 2At) t /√(1−t²) dt = A
        assert!((arcsine_pairing(&TestPolynomial::monomial(1), 1, 0.3, 0.1) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn kernel_scan_decreases() {
        let cfg = LimitScanConfig::default();
        let t = kernel_limit_scan(&TestPolynomial::monomial(1), 1, 1.0, 0.5, &cfg).unwrap();
        assert!(t.report(cfg.cap).passed, "{:?}", t.rows);
        let t = kernel_limit_scan(&TestPolynomial(vec![1.0]), 0, 1.0, 0.5, &cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.abs_error < 1e-12), "{:?}", t.rows);
    }
}
