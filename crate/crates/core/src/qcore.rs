//! q-shifted factorials, terminating basic hypergeometric series and Jackson
//! q-integrals.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Environment variable overriding [`QBase::max_terms`].
pub const MAX_TERMS_ENV: &str = "QLEG_MAX_TERMS";

const DEFAULT_MAX_TERMS: usize = 200_000;

/// Above this base, infinite products accumulate in log space.
const LOG_SPACE_THRESHOLD: f64 = 0.99;

pub fn default_max_terms() -> usize {
    static CELL: OnceLock<usize> = OnceLock::new();
    *CELL.get_or_init(|| {
        std::env::var(MAX_TERMS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(DEFAULT_MAX_TERMS)
    })
}

/// Validated base `q ∈ (0, 1)` with truncation controls for infinite sums
/// and products.
#[derive(Debug, Clone, Copy)]
pub struct QBase<R> {
    q: R,
    eps: f64,
    max_terms: usize,
}

impl<R: Real> QBase<R> {
    pub fn new(q: f64) -> Result<Self> {
        Self::from_real(R::from_f64(q))
    }

    pub fn from_real(q: R) -> Result<Self> {
        let qf = q.to_f64();
        if !(qf > 0.0 && qf < 1.0) || !q.is_finite() || q >= R::one() {
            return Err(Error::invalid(format!("base q = {qf} must lie strictly inside (0, 1)")));
        }
        Ok(Self {
            q,
            eps: R::EPSILON,
            max_terms: default_max_terms(),
        })
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps = {eps} must be positive")));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::invalid("max_terms must be at least 1"));
        }
        self.max_terms = max_terms;
        Ok(self)
    }

    #[inline]
    pub fn q(&self) -> R {
        self.q
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `q^e` for any integer exponent.
    #[inline]
    pub fn pow(&self, e: i64) -> R {
        self.q.powi(e as i32)
    }

    /// The base `q²` with the same truncation controls.
    pub fn squared(&self) -> Self {
        Self {
            q: self.q * self.q,
            ..*self
        }
    }

    /// Same base in another scalar type.
    pub fn convert<S: Real>(&self) -> QBase<S> {
        QBase {
            q: S::from_f64(self.q.to_f64()),
            eps: self.eps.max(S::EPSILON),
            max_terms: self.max_terms,
        }
    }
}

/// A parameter of the form `coeff · q^power`.
///
/// Keeping the power of `q` symbolic makes factors such as `1 − q^{-x} q^x`
/// vanish exactly, which terminating series rely on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam<R> {
    pub coeff: R,
    pub power: i64,
}

impl<R: Real> QParam<R> {
    pub fn new(coeff: R, power: i64) -> Self {
        Self { coeff, power }
    }

    /// `q^power`.
    pub fn q_power(power: i64) -> Self {
        Self {
            coeff: R::one(),
            power,
        }
    }

    pub fn value(v: R) -> Self {
        Self { coeff: v, power: 0 }
    }

    pub fn zero() -> Self {
        Self::value(R::zero())
    }

    pub fn eval(&self, base: &QBase<R>) -> R {
        if self.coeff.is_zero() {
            return R::zero();
        }
        self.coeff * base.pow(self.power)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.coeff * other.coeff, self.power + other.power)
    }

    pub fn scale(&self, c: R) -> Self {
        Self::new(self.coeff * c, self.power)
    }

    pub fn shift(&self, by: i64) -> Self {
        Self::new(self.coeff, self.power + by)
    }

    /// `1 − coeff·q^{power+j}`, exactly zero when the monomial is `q^0`.
    #[inline]
    fn factor(&self, base: &QBase<R>, j: i64) -> R {
        if self.coeff.is_zero() {
            return R::one();
        }
        if self.coeff == R::one() && self.power + j == 0 {
            return R::zero();
        }
        R::one() - self.coeff * base.pow(self.power + j)
    }
}

impl<R: Real> From<R> for QParam<R> {
    fn from(v: R) -> Self {
        Self::value(v)
    }
}

/// `(a; q)_n = ∏_{k<n} (1 − a q^k)`.
pub fn qpochhammer_finite<R: Real>(a: R, base: &QBase<R>, n: usize) -> R {
    qpochhammer_param(&QParam::value(a), base, n)
}

/// `(a; q)_n` for a symbolic parameter; exact zeros are preserved.
pub fn qpochhammer_param<R: Real>(a: &QParam<R>, base: &QBase<R>, n: usize) -> R {
    let mut p = R::one();
    for k in 0..n {
        let f = a.factor(base, k as i64);
        if f.is_zero() {
            return R::zero();
        }
        p *= f;
    }
    p
}

/// `(a; q^{-1})_n = ∏_{k<n} (1 − a q^{-k})`.
pub fn qpochhammer_inverse_base<R: Real>(a: &QParam<R>, base: &QBase<R>, n: usize) -> R {
    let mut p = R::one();
    for k in 0..n {
        let f = a.factor(base, -(k as i64));
        if f.is_zero() {
            return R::zero();
        }
        p *= f;
    }
    p
}

/// Result of a truncated infinite product.
#[derive(Debug, Clone, Copy)]
pub struct InfiniteProduct<R> {
    pub value: R,
    pub terms: usize,
    /// Upper bound on the relative error introduced by truncation.
    pub tail_bound: f64,
}

/// `(a; q)_∞`, truncated once `|a q^k| < eps (1 − q)`.
///
/// The omitted factors satisfy `|log ∏_{j≥k}(1 − a q^j)| ≤ t / ((1 − q)(1 − t))`
/// with `t = |a q^k|`, which is what [`InfiniteProduct::tail_bound`] reports.
pub fn qpochhammer_infinite_with_bound<R: Real>(a: R, base: &QBase<R>) -> Result<InfiniteProduct<R>> {
    if a.is_zero() {
        return Ok(InfiniteProduct {
            value: R::one(),
            terms: 0,
            tail_bound: 0.0,
        });
    }
    let q = base.q();
    let one_minus_q = (R::one() - q).to_f64();
    let threshold = base.eps() * one_minus_q;
    let log_space = q.to_f64() > LOG_SPACE_THRESHOLD;

    let mut t = a;
    let mut value = R::one();
    let mut log_sum = CompensatedSum::<R>::new();
    let mut negative = false;
    let mut k = 0usize;
    loop {
        let tf = t.to_f64().abs();
        if tf < threshold {
            break;
        }
        if k >= base.max_terms() {
            return Err(Error::NonConvergence {
                what: format!("({:e}; {})_∞", a.to_f64(), q.to_f64()),
                terms: k,
            });
        }
        let f = R::one() - t;
        if f.is_zero() {
            return Ok(InfiniteProduct {
                value: R::zero(),
                terms: k + 1,
                tail_bound: 0.0,
            });
        }
        if log_space {
            if f < R::zero() {
                negative = !negative;
            }
            log_sum.add(f.abs().ln());
        } else {
            value *= f;
        }
        t *= q;
        k += 1;
    }
    if log_space {
        value = log_sum.value().exp();
        if negative {
            value = -value;
        }
    }
    let tf = t.to_f64().abs();
    let log_bound = tf / (one_minus_q * (1.0 - tf));
    Ok(InfiniteProduct {
        value,
        terms: k,
        tail_bound: log_bound.exp_m1(),
    })
}

pub fn qpochhammer_infinite<R: Real>(a: R, base: &QBase<R>) -> Result<R> {
    qpochhammer_infinite_with_bound(a, base).map(|p| p.value)
}

/// Product `(a_1, …, a_k; q)_∞`.
pub fn qpochhammer_infinite_many<R: Real>(params: &[R], base: &QBase<R>) -> Result<R> {
    let mut p = R::one();
    for &a in params {
        p *= qpochhammer_infinite(a, base)?;
    }
    Ok(p)
}

/// A terminating basic hypergeometric series
/// `Σ_{k=0}^{degree} (a_1,…,a_r;q)_k / (b_1,…,b_s;q)_k · z^k / (q;q)_k`.
///
/// A zero denominator parameter contributes `(0;q)_k = 1`.
#[derive(Debug, Clone)]
pub struct SeriesSpec<R> {
    pub numerator: Vec<QParam<R>>,
    pub denominator: Vec<QParam<R>>,
    pub base: QBase<R>,
    pub argument: R,
    pub degree: usize,
}

impl<R: Real> SeriesSpec<R> {
    /// Checked constructor: one numerator parameter must equal `q^{-degree}`.
    pub fn new(
        numerator: Vec<QParam<R>>,
        denominator: Vec<QParam<R>>,
        base: QBase<R>,
        argument: R,
        degree: usize,
    ) -> Result<Self> {
        let target = base.pow(-(degree as i64));
        let witness = numerator.iter().any(|p| {
            (p.coeff == R::one() && p.power == -(degree as i64))
                || ((p.eval(&base) - target).abs() <= target.abs() * R::from_f64(64.0 * R::EPSILON))
        });
        if !witness {
            return Err(Error::invalid(format!(
                "no numerator parameter equals q^-{degree}; series does not terminate"
            )));
        }
        Ok(Self {
            numerator,
            denominator,
            base,
            argument,
            degree,
        })
    }

    /// Series whose first numerator parameter is `q^{-degree}`; termination
    /// holds by construction.
    pub fn terminating(
        degree: usize,
        rest: impl IntoIterator<Item = QParam<R>>,
        denominator: Vec<QParam<R>>,
        base: QBase<R>,
        argument: R,
    ) -> Self {
        let mut numerator = vec![QParam::q_power(-(degree as i64))];
        numerator.extend(rest);
        Self {
            numerator,
            denominator,
            base,
            argument,
            degree,
        }
    }
}

/// Exact finite sum of a terminating series.
pub fn phi_terminating<R: Real>(spec: &SeriesSpec<R>) -> Result<R> {
    let base = &spec.base;
    let tiny = R::from_f64(8.0 * R::EPSILON);
    let mut term = R::one();
    let mut sum = CompensatedSum::new();
    sum.add(term);
    for k in 0..spec.degree {
        let j = k as i64;
        let mut num = R::one();
        for a in &spec.numerator {
            num *= a.factor(base, j);
        }
        if num.is_zero() {
            break;
        }
        let mut den = R::one();
        for b in &spec.denominator {
            let f = b.factor(base, j);
            if f.abs() <= tiny * (R::one() + (R::one() - f).abs()) {
                return Err(Error::domain(format!(
                    "denominator Pochhammer vanishes at k = {}",
                    k + 1
                )));
            }
            den *= f;
        }
        den *= R::one() - base.pow(j + 1);
        term = term * num / den * spec.argument;
        sum.add(term);
    }
    Ok(sum.value())
}

/// Jackson q-integral over `[lower, upper]`.
#[derive(Debug, Clone, Copy)]
pub struct QIntegralSpec<R> {
    pub lower: R,
    pub upper: R,
    pub base: QBase<R>,
    /// Absolute size below which a scaled increment counts as negligible.
    pub tail_bound: f64,
    /// Number of consecutive negligible increments that ends a sum.
    pub run: usize,
}

impl<R: Real> QIntegralSpec<R> {
    pub fn new(lower: R, upper: R, base: QBase<R>) -> Self {
        Self {
            lower,
            upper,
            base,
            tail_bound: default_tail_bound::<R>(),
            run: 5,
        }
    }

    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound;
        self
    }

    pub fn with_run(mut self, run: usize) -> Self {
        self.run = run.max(1);
        self
    }
}

pub fn default_tail_bound<R: Real>() -> f64 {
    R::EPSILON * 1e-2
}

#[derive(Debug, Clone, Copy)]
pub struct QIntegral<R> {
    pub value: R,
    pub upper_terms: usize,
    pub lower_terms: usize,
}

impl<R> QIntegral<R> {
    pub fn terms(&self) -> usize {
        self.upper_terms + self.lower_terms
    }
}

/// `∫_0^a f d_qx = a(1 − q) Σ_k f(a q^k) q^k`.
pub fn q_integral_from_zero<R: Real, F>(
    f: &mut F,
    a: R,
    base: &QBase<R>,
    tail_bound: f64,
    run: usize,
) -> Result<(R, usize)>
where
    F: FnMut(R) -> R,
{
    if a.is_zero() {
        return Ok((R::zero(), 0));
    }
    let q = base.q();
    let scale = a * (R::one() - q);
    let mut node = a;
    let mut weight = R::one();
    let mut sum = CompensatedSum::new();
    let mut quiet = 0usize;
    let mut k = 0usize;
    while quiet < run {
        if k >= base.max_terms() {
            return Err(Error::NonConvergence {
                what: format!("q-integral on [0, {:e}]", a.to_f64()),
                terms: k,
            });
        }
        let inc = scale * f(node) * weight;
        if !inc.is_finite() {
            return Err(Error::domain(format!("integrand not finite at {:e}", node.to_f64())));
        }
        sum.add(inc);
        if inc.to_f64().abs() < tail_bound {
            quiet += 1;
        } else {
            quiet = 0;
        }
        node *= q;
        weight *= q;
        k += 1;
    }
    Ok((sum.value(), k))
}

/// `∫_lower^upper f d_qx = ∫_0^upper − ∫_0^lower`.
pub fn q_integral<R: Real, F>(mut f: F, spec: &QIntegralSpec<R>) -> Result<QIntegral<R>>
where
    F: FnMut(R) -> R,
{
    let (hi, upper_terms) = q_integral_from_zero(&mut f, spec.upper, &spec.base, spec.tail_bound, spec.run)?;
    let (lo, lower_terms) = q_integral_from_zero(&mut f, spec.lower, &spec.base, spec.tail_bound, spec.run)?;
    Ok(QIntegral {
        value: hi - lo,
        upper_terms,
        lower_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;

    fn base(q: f64) -> QBase<f64> {
        QBase::new(q).unwrap()
    }

    #[test]
    fn base_rejects_boundary() {
        assert!(QBase::<f64>::new(0.0).is_err());
        assert!(QBase::<f64>::new(1.0).is_err());
        assert!(QBase::<f64>::new(-0.3).is_err());
        assert!(QBase::<f64>::new(f64::NAN).is_err());
        assert!(base(0.5).with_eps(0.0).is_err());
        assert!(base(0.5).with_max_terms(0).is_err());
    }

    #[test]
    fn finite_pochhammer_examples() {
        let b = base(0.5);
        assert_eq!(qpochhammer_finite(0.5, &b, 0), 1.0);
        assert_eq!(qpochhammer_finite(0.5, &b, 2), 0.375);
        assert_eq!(qpochhammer_finite(1.0, &b, 3), 0.0);
    }

    #[test]
    fn infinite_pochhammer_examples() {
        let b = base(0.5);
        assert_eq!(qpochhammer_infinite(0.0, &b).unwrap(), 1.0);
        assert_eq!(qpochhammer_infinite(1.0, &b).unwrap(), 0.0);
        let direct: f64 = (0..200).map(|k| 1.0 - 0.5 * 0.5f64.powi(k)).product();
        let v = qpochhammer_infinite(0.5, &b).unwrap();
        assert!((v - direct).abs() / direct < 1e-14);
    }

    #[test]
    fn infinite_pochhammer_reports_tail_bound() {
        let b = base(0.9);
        let p = qpochhammer_infinite_with_bound(0.7, &b).unwrap();
        assert!(p.tail_bound > 0.0 && p.tail_bound <= 2.0 * f64::EPSILON);
        assert!(p.terms > 100);
    }

    #[test]
    fn log_space_product_agrees_with_direct_product() {
        let b = base(0.995);
        let v = qpochhammer_infinite(0.3, &b).unwrap();
        let direct: f64 = (0..20_000).map(|k| 1.0 - 0.3 * 0.995f64.powi(k)).product();
        assert!((v - direct).abs() / direct < 1e-10, "{v} {direct}");
        let neg = qpochhammer_infinite(2.0, &b).unwrap();
        let direct: f64 = (0..20_000).map(|k| 1.0 - 2.0 * 0.995f64.powi(k)).product();
        assert!((neg - direct).abs() / direct.abs() < 1e-10, "{neg} {direct}");
    }

    #[test]
    fn non_convergence_when_capped() {
        let b = base(0.9).with_max_terms(10).unwrap();
        assert!(matches!(
            qpochhammer_infinite(0.5, &b),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn two_phi_one_two_terms() {
        // 1 − (1 − q^{-1})(1 − b) z / (1 − q) = 1 − (1 − b) z / q
        let b = base(0.5);
        let spec = SeriesSpec::terminating(1, [QParam::value(0.25)], vec![QParam::zero()], b, 0.1);
        let v = phi_terminating(&spec).unwrap();
        assert!((v - 0.85).abs() < 1e-15, "{v}");
    }

    #[test]
    fn degree_zero_series_is_one() {
        let spec = SeriesSpec::terminating(0, [QParam::value(3.0)], vec![QParam::value(0.2)], base(0.3), 7.0);
        assert_eq!(phi_terminating(&spec).unwrap(), 1.0);
    }

    #[test]
    fn q_binomial_theorem() {
        // 1φ0(q^{-p}; —; q, z) = (q^{-p} z; q)_p
        let b = base(0.5);
        for p in 0..=10usize {
            let z = 0.2;
            let spec = SeriesSpec::terminating(p, [], vec![], b, z);
            let lhs = phi_terminating(&spec).unwrap();
            let rhs = qpochhammer_finite(b.pow(-(p as i64)) * z, &b, p);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "p={p}: {lhs} {rhs}");
        }
    }

    #[test]
    fn checked_constructor_requires_termination_witness() {
        let b = base(0.5);
        assert!(SeriesSpec::new(vec![QParam::value(0.3)], vec![], b, 1.0, 2).is_err());
        assert!(SeriesSpec::new(vec![QParam::value(4.0)], vec![], b, 1.0, 2).is_ok());
    }

    #[test]
    fn vanishing_denominator_is_domain_error() {
        let b = base(0.5);
        // (q^{-1}; q)_2 vanishes at its second factor
        let spec = SeriesSpec::terminating(3, [], vec![QParam::q_power(-1)], b, 0.5);
        assert!(matches!(phi_terminating(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn euler_identity() {
        for &q in &[0.3, 0.7] {
            let b = base(q);
            for &t in &[0.1, 1.0, 3.0] {
                let mut sum = 0.0;
                let mut term = 1.0;
                let mut n = 0;
                while term.abs() > 1e-30 || n < 5 {
                    sum += term;
                    term *= q.powi(n) * t / (1.0 - q.powi(n + 1));
                    n += 1;
                }
                let rhs = qpochhammer_infinite(-t, &b).unwrap();
                assert!((sum - rhs).abs() / rhs < 1e-12, "q={q} t={t}");
            }
        }
    }

    #[test]
    fn q_integral_examples() {
        let b = base(0.5);
        let one = q_integral(|_| 1.0, &QIntegralSpec::new(0.0, 1.0, b)).unwrap();
        assert!((one.value - 1.0).abs() < 1e-15);
        let lin = q_integral(|x| x, &QIntegralSpec::new(0.0, 1.0, b)).unwrap();
        assert!((lin.value - 2.0 / 3.0).abs() < 1e-15);
        let both = q_integral(|_| 1.0, &QIntegralSpec::new(-0.2, 0.8, b)).unwrap();
        assert!((both.value - 1.0).abs() < 1e-15);
        assert!(both.lower_terms > 0 && both.upper_terms > 0);
    }

    #[test]
    fn q_integral_of_monomials_in_extended_precision() {
        let b = QBase::<DoubleDouble>::new(0.6).unwrap();
        let a = DoubleDouble::from_f64(1.3);
        for m in 0..6 {
            let spec = QIntegralSpec::new(DoubleDouble::zero(), a, b);
            let v = q_integral(|x: DoubleDouble| x.powi(m), &spec).unwrap().value;
            let q = b.q();
            let exact = a.powi(m + 1) * (DoubleDouble::one() - q) / (DoubleDouble::one() - q.powi(m + 1));
            assert!(((v - exact) / exact).abs().to_f64() < 1e-30);
        }
    }

    #[test]
    fn q_integral_run_length_is_configurable() {
        let b = base(0.5);
        let short = q_integral(|_| 1.0, &QIntegralSpec::new(0.0, 1.0, b).with_run(1)).unwrap();
        let long = q_integral(|_| 1.0, &QIntegralSpec::new(0.0, 1.0, b).with_run(10)).unwrap();
        assert!(long.upper_terms == short.upper_terms + 9);
    }
}
