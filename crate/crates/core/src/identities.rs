//! Scalar identities between the families: orthogonality relations,
//! q-Charlier sums, eigenvector norms, the big q-Legendre addition formula,
//! its little q-Legendre specialisation and the product formula.

use crate::error::{Error, Result};
use crate::families::{
    big_q_legendre, big_q_legendre_recurrence, dual_q_krawtchouk, little_q_jacobi, monic_recurrence_table, q_charlier, require_positive_cd,
    DualQKrawtchoukParams,
};
use crate::poly::NewtonPoly;
use crate::qcore::{
    phi_terminating, qpochhammer_finite, qpochhammer_infinite, qpochhammer_infinite_many,
    qpochhammer_inverse_base, QBase, QParam, SeriesSpec,
};
use crate::report::{IdentityId, ParamRecord, Precision, Truncation, VerificationReport};
use crate::scalar::{CompensatedSum, DoubleDouble, Real};

/// Weight `(qx/c, −qx/d; q)_∞` of the monic `a = b = 0` family.
pub fn big00_weight<R: Real>(x: R, c: R, d: R, base: &QBase<R>) -> Result<R> {
    let q = base.q();
    Ok(qpochhammer_infinite(q * x / c, base)? * qpochhammer_infinite(-q * x / d, base)?)
}

/// `(q, −d/c, −qc/d; q)_∞`.
fn big00_constant<R: Real>(c: R, d: R, base: &QBase<R>) -> Result<R> {
    let q = base.q();
    qpochhammer_infinite_many(&[q, -d / c, -q * c / d], base)
}

/// Squared norm `q^{n(n−1)/2} (cd)^n (q;q)_n (1−q) c (q, −d/c, −qc/d; q)_∞`.
pub fn big00_norm<R: Real>(n: usize, c: R, d: R, base: &QBase<R>) -> Result<R> {
    let ni = n as i64;
    let q = base.q();
    Ok(base.pow(ni * (ni - 1) / 2)
        * (c * d).powi(n as i32)
        * qpochhammer_finite(q, base, n)
        * (R::one() - q)
        * c
        * big00_constant(c, d, base)?)
}

/// `∫_{−d}^{c} g(x, P̂_0(x), …, P̂_nmax(x)) (qx/c, −qx/d; q)_∞ d_qx` for a
/// vector-valued `g`, sharing the node evaluations between components.
fn weighted_integrals<R: Real, F>(
    nmax: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    tail_bound: f64,
    outputs: usize,
    mut g: F,
) -> Result<(Vec<R>, usize)>
where
    F: FnMut(R, &[R], &mut [R]) -> Result<()>,
{
    let mut total = vec![R::zero(); outputs];
    let mut terms = 0;
    let mut buf = vec![R::zero(); outputs];
    for (end, sign) in [(c, R::one()), (-d, -R::one())] {
        // integrate each output along the same nodes; stop when all are quiet
        let q = base.q();
        let scale = end * (R::one() - q);
        let mut sums: Vec<CompensatedSum<R>> = (0..outputs).map(|_| CompensatedSum::new()).collect();
        let mut node = end;
        let mut weight_q = R::one();
        let mut quiet = 0;
        let mut k = 0;
        while quiet < 5 {
            if k >= base.max_terms() {
                return Err(Error::NonConvergence {
                    what: "weighted q-integral".into(),
                    terms: k,
                });
            }
            let w = big00_weight(node, c, d, base)?;
            let table = monic_recurrence_table(nmax, node, c, d, base);
            g(node, &table, &mut buf)?;
            let mut loud = false;
            for (s, v) in sums.iter_mut().zip(&buf) {
                let inc = scale * *v * w * weight_q;
                if !inc.is_finite() {
                    return Err(Error::domain("integrand not finite"));
                }
                if inc.abs().to_f64() >= tail_bound {
                    loud = true;
                }
                s.add(inc);
            }
            quiet = if loud { 0 } else { quiet + 1 };
            node *= q;
            weight_q *= q;
            k += 1;
        }
        for (t, s) in total.iter_mut().zip(&sums) {
            *t += sign * s.value();
        }
        terms += k;
    }
    Ok((total, terms))
}

/// Gram matrix `∫ P̂_n P̂_m w d_qx` for `n, m ≤ nmax` and the q-integral
/// term count.
pub fn gram_big00<R: Real>(nmax: usize, c: R, d: R, base: &QBase<R>, tail_bound: f64) -> Result<(Vec<Vec<R>>, usize)> {
    require_positive_cd(c, d)?;
    let dim = nmax + 1;
    let (flat, terms) = weighted_integrals(nmax, c, d, base, tail_bound, dim * dim, |_, t, out| {
        for n in 0..dim {
            for m in 0..dim {
                out[n * dim + m] = t[n] * t[m];
            }
        }
        Ok(())
    })?;
    Ok(((0..dim).map(|n| flat[n * dim..(n + 1) * dim].to_vec()).collect(), terms))
}

fn big00_record<R: Real>(n: usize, m: usize, c: R, d: R, base: &QBase<R>) -> ParamRecord {
    ParamRecord::new()
        .with("n", n)
        .with("m", m)
        .with("c", c.to_f64())
        .with("d", d.to_f64())
        .with("q", base.q().to_f64())
}

/// Orthogonality of `P̂_n(·; 0, 0, c, d; q)` against the Jackson weight.
///
/// Off-diagonal entries are measured relative to `√(N_n N_m)`.
pub fn orthogonality_big00<R: Real>(
    n: usize,
    m: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    tolerance: f64,
) -> Result<VerificationReport> {
    require_positive_cd(c, d)?;
    let tail = 1e-2 * R::EPSILON;
    let top = n.max(m);
    let (vals, terms) = weighted_integrals(top, c, d, base, tail, 1, |_, t, out| {
        out[0] = t[n] * t[m];
        Ok(())
    })?;
    orthogonality_report(n, m, vals[0], c, d, base, tolerance, terms, tail)
}

#[allow(clippy::too_many_arguments)]
fn orthogonality_report<R: Real>(
    n: usize,
    m: usize,
    lhs: R,
    c: R,
    d: R,
    base: &QBase<R>,
    tolerance: f64,
    terms: usize,
    tail: f64,
) -> Result<VerificationReport> {
    let nn = big00_norm(n, c, d, base)?;
    let trunc = Truncation::for_real::<R>().integral_terms(terms).tail_bound(tail);
    let rec = big00_record(n, m, c, d, base);
    Ok(if n == m {
        VerificationReport::compare(IdentityId::Orthogonality, rec, lhs, nn, tolerance, trunc)
    } else {
        let scale = (nn * big00_norm(m, c, d, base)?).sqrt().to_f64();
        VerificationReport::compare_scaled(IdentityId::Orthogonality, rec, lhs, R::zero(), scale, tolerance, trunc)
    })
}

/// All `(n, m)` reports with `n, m ≤ nmax` from one shared q-integral pass,
/// with separate tolerances for the diagonal and the off-diagonal entries.
pub fn orthogonality_matrix<R: Real>(
    nmax: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    diagonal_tolerance: f64,
    off_diagonal_tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let tail = 1e-2 * R::EPSILON;
    let (g, terms) = gram_big00(nmax, c, d, base, tail)?;
    let mut out = Vec::new();
    for n in 0..=nmax {
        for m in 0..=nmax {
            let tol = if n == m { diagonal_tolerance } else { off_diagonal_tolerance };
            out.push(orthogonality_report(n, m, g[n][m], c, d, base, tol, terms, tail)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharlierKind {
    /// `Σ a^x q^{x(x−1)/2}/(q;q)_x c_n c_m(q^{-x}; a; q)`.
    Same,
    /// `Σ (−1)^x q^{x(x−1)/2}/(q;q)_x c_n(q^{-x}; a; q) c_m(q^{-x}; 1/a; q)`.
    Cross,
}

/// Sum of a series over `x ≥ 0` whose terms eventually decay like
/// `q^{x²/2}`; stops after five consecutive terms below `eps` times the
/// largest term seen, once terms are decreasing.
fn gaussian_tail_sum<R: Real, F>(mut term: F, eps: f64, max_terms: usize) -> Result<(R, usize, f64)>
where
    F: FnMut(usize) -> Result<R>,
{
    let mut sum = CompensatedSum::new();
    let mut biggest = 0.0f64;
    let mut quiet = 0;
    let mut last = f64::INFINITY;
    let mut x = 0;
    while quiet < 5 {
        if x >= max_terms {
            return Err(Error::NonConvergence {
                what: "Gaussian-tail sum".into(),
                terms: x,
            });
        }
        let t = term(x)?;
        let tf = t.abs().to_f64();
        if !tf.is_finite() {
            return Err(Error::domain(format!("term {x} is not finite")));
        }
        sum.add(t);
        biggest = biggest.max(tf);
        quiet = if tf <= eps * biggest && tf <= last { quiet + 1 } else { 0 };
        last = tf;
        x += 1;
    }
    Ok((sum.value(), x, last))
}

/// q-Charlier orthogonality (`Same`) or vanishing cross sum (`Cross`).
pub fn q_charlier_orthogonality<R: Real>(
    n: usize,
    m: usize,
    a: R,
    base: &QBase<R>,
    kind: CharlierKind,
    tolerance: f64,
) -> Result<VerificationReport> {
    if !(a > R::zero()) {
        return Err(Error::invalid("q-Charlier parameter a must be positive"));
    }
    let q = base.q();
    let eps = R::EPSILON * 1e-2;
    let a_inv = R::one() / a;
    // running a^x q^{x(x−1)/2}/(q;q)_x, or with −1 in place of a
    let mut pref = R::one();
    let mult = match kind {
        CharlierKind::Same => a,
        CharlierKind::Cross => -R::one(),
    };
    let (lhs, terms, last) = gaussian_tail_sum(
        |x| {
            if x > 0 {
                let xi = x as i64;
                pref = pref * mult * base.pow(xi - 1) / (R::one() - base.pow(xi));
            }
            let y = QParam::q_power(-(x as i64));
            let cn = q_charlier(n, y, a, base)?;
            let cm = match kind {
                CharlierKind::Same => q_charlier(m, y, a, base)?,
                CharlierKind::Cross => q_charlier(m, y, a_inv, base)?,
            };
            Ok(pref * cn * cm)
        },
        eps,
        base.max_terms(),
    )?;
    let rec = ParamRecord::new()
        .with("n", n)
        .with("m", m)
        .with("a", a.to_f64())
        .with("q", q.to_f64());
    let trunc = Truncation::for_real::<R>().series_terms(terms).tail_bound(last);
    let (id, rhs) = match kind {
        CharlierKind::Same => {
            let rhs = if n == m {
                base.pow(-(n as i64))
                    * qpochhammer_finite(q, base, n)
                    * qpochhammer_finite(-q / a, base, n)
                    * qpochhammer_infinite(-a, base)?
            } else {
                R::zero()
            };
            (IdentityId::CharlierSame, rhs)
        }
        CharlierKind::Cross => (IdentityId::CharlierCross, R::zero()),
    };
    if id == IdentityId::CharlierSame && n != m {
        // off-diagonal: measure against the geometric mean of the diagonal norms
        let norm = |k: usize| -> Result<R> {
            Ok(base.pow(-(k as i64))
                * qpochhammer_finite(q, base, k)
                * qpochhammer_finite(-q / a, base, k)
                * qpochhammer_infinite(-a, base)?)
        };
        let scale = (norm(n)? * norm(m)?).sqrt().to_f64();
        return Ok(VerificationReport::compare_scaled(id, rec, lhs, rhs, scale, tolerance, trunc));
    }
    Ok(VerificationReport::compare(id, rec, lhs, rhs, tolerance, trunc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormPath {
    /// Truncated sum over the basis index.
    Direct,
    Closed,
}

/// Squared eigenvector length `h_x(σ)` for the eigenvalue `q^{2σ+2x}`.
///
/// `Closed`: `q^{-2x} (q²;q²)_x (−q^{2σ+2};q²)_x (−q^{−2σ};q²)_∞`.
pub fn h_norm<R: Real>(x: usize, sigma: R, base: &QBase<R>, path: NormPath) -> Result<(R, usize)> {
    let q = base.q();
    let big_q = base.squared();
    let q2s = q.powf(R::from_f64(2.0) * sigma);
    match path {
        NormPath::Closed => {
            let qq = big_q.q();
            let v = base.pow(-2 * x as i64)
                * qpochhammer_finite(qq, &big_q, x)
                * qpochhammer_finite(-q2s * qq, &big_q, x)
                * qpochhammer_infinite(-R::one() / q2s, &big_q)?;
            Ok((v, 0))
        }
        NormPath::Direct => {
            let xi = x as i64;
            // (−1)^x q^{2x(x+σ)} Σ_n q^{n(n−1)} q^{−2σn}/(Q;Q)_n φ_n q^{−2nx}
            let lead = R::sign_pow(xi) * base.pow(2 * xi * xi) * q2s.powi(x as i32);
            let z = -big_q.pow(1 + xi) * q2s;
            let mut pref = R::one();
            let (s, terms, _) = gaussian_tail_sum(
                |n| {
                    let ni = n as i64;
                    if n > 0 {
                        pref = pref * base.pow(2 * (ni - 1)) / q2s / (R::one() - big_q.pow(ni));
                    }
                    let spec =
                        SeriesSpec::terminating(x, [QParam::q_power(-ni)], vec![QParam::zero()], big_q, z);
                    let phi = phi_terminating(&spec)?;
                    Ok(pref * phi * base.pow(-2 * ni * xi))
                },
                R::EPSILON * 1e-2,
                base.max_terms(),
            )?;
            Ok((lead * s, terms))
        }
    }
}

pub fn verify_h_norm<R: Real>(x: usize, sigma: R, base: &QBase<R>, tolerance: f64) -> Result<VerificationReport> {
    let (direct, terms) = h_norm(x, sigma, base, NormPath::Direct)?;
    let (closed, _) = h_norm(x, sigma, base, NormPath::Closed)?;
    let rec = ParamRecord::new()
        .with("x", x)
        .with("sigma", sigma.to_f64())
        .with("q", base.q().to_f64());
    Ok(VerificationReport::compare(
        IdentityId::HNorm,
        rec,
        direct,
        closed,
        tolerance,
        Truncation::for_real::<R>().series_terms(terms),
    ))
}

/// Arguments of the big q-Legendre addition formula.
#[derive(Debug, Clone, Copy)]
pub struct AdditionParams<R> {
    pub l: usize,
    pub p: usize,
    pub x: R,
    pub c: R,
    pub d: R,
    pub base: QBase<R>,
}

impl<R: Real> AdditionParams<R> {
    pub fn new(l: usize, p: usize, x: R, c: R, d: R, base: QBase<R>) -> Result<Self> {
        require_positive_cd(c, d)?;
        Ok(Self { l, p, x, c, d, base })
    }

    pub fn record(&self) -> ParamRecord {
        ParamRecord::new()
            .with("l", self.l)
            .with("p", self.p)
            .with("x", self.x.to_f64())
            .with("c", self.c.to_f64())
            .with("d", self.d.to_f64())
            .with("q", self.base.q().to_f64())
    }

    pub fn convert<S: Real>(&self) -> AdditionParams<S> {
        AdditionParams {
            l: self.l,
            p: self.p,
            x: S::from_f64(self.x.to_f64()),
            c: S::from_f64(self.c.to_f64()),
            d: S::from_f64(self.d.to_f64()),
            base: self.base.convert(),
        }
    }
}

/// `(−1)^l q^{−l(l+1)/2} (−qd/c; q)_l / (q^{l+1}; q)_l`.
pub fn addition_lhs_factor<R: Real>(l: usize, c: R, d: R, base: &QBase<R>) -> R {
    let q = base.q();
    let li = l as i64;
    R::sign_pow(li) * base.pow(-li * (li + 1) / 2) * qpochhammer_finite(-q * d / c, base, l)
        / qpochhammer_finite(base.pow(li + 1), base, l)
}

/// `R_{l−m}(q^{-l} − (d/c) q^{-l}; c/d, 2l; q)`.
pub fn addition_krawtchouk<R: Real>(l: usize, m: usize, c: R, d: R, base: &QBase<R>) -> Result<R> {
    let params = DualQKrawtchoukParams::new(c / d, 2 * l, *base)?;
    dual_q_krawtchouk(l - m, l, &params)
}

pub fn addition_lhs<R: Real>(a: &AdditionParams<R>) -> Result<R> {
    let pl = big_q_legendre_recurrence(a.l, a.x, a.c, a.d, &a.base)?;
    let pp = monic_recurrence_table(a.p, a.x, a.c, a.d, &a.base)[a.p];
    Ok(addition_lhs_factor(a.l, a.c, a.d, &a.base) * pl * pp)
}

/// The right side split into its three groups of terms.
#[derive(Debug, Clone)]
pub struct AdditionRhs<R> {
    pub zero_term: R,
    /// Terms with `P̂_{p−m}`, `m = 1..=l`; exactly zero for `m > p`.
    pub descending: Vec<R>,
    /// Terms with `P̂_{p+m}`, `m = 1..=l`.
    pub ascending: Vec<R>,
}

impl<R: Real> AdditionRhs<R> {
    pub fn total(&self) -> R {
        let mut s = CompensatedSum::new();
        s.add(self.zero_term);
        for &t in self.descending.iter().chain(&self.ascending) {
            s.add(t);
        }
        s.value()
    }
}

/// Coefficient of `R_{l−m} p_{l−m}(q^{p−m}; q^m, q^m; q) P̂_{p−m}(x)` in the
/// descending sum.
pub fn descending_coefficient<R: Real>(l: usize, m: usize, p: usize, d: R, base: &QBase<R>) -> R {
    let q = base.q();
    let (li, mi, pi) = (l as i64, m as i64, p as i64);
    R::sign_pow(mi) * d.powi(m as i32) * base.pow(mi * (pi - li))
        * qpochhammer_inverse_base(&QParam::q_power(pi), base, m)
        / (qpochhammer_finite(q, base, l - m) * qpochhammer_finite(q, base, m))
}

/// Coefficient of `R_{l−m} p_{l−m}(q^p; q^m, q^m; q) P̂_{p+m}(x)` in the
/// ascending sum.
pub fn ascending_coefficient<R: Real>(l: usize, m: usize, c: R, base: &QBase<R>) -> R {
    let q = base.q();
    let (li, mi) = (l as i64, m as i64);
    // q^{m(m+1)/2 − lm}
    R::sign_pow(mi) * base.pow(mi * (mi + 1) / 2 - li * mi)
        / (c.powi(m as i32) * qpochhammer_finite(q, base, l - m) * qpochhammer_finite(q, base, m))
}

pub fn addition_rhs<R: Real>(a: &AdditionParams<R>) -> Result<AdditionRhs<R>> {
    let (l, p) = (a.l, a.p);
    let base = &a.base;
    let q = base.q();
    let table = monic_recurrence_table(p + l, a.x, a.c, a.d, base);
    let qp = base.pow(p as i64);
    let zero_term = addition_krawtchouk(l, 0, a.c, a.d, base)? * little_q_jacobi(l, qp, R::one(), R::one(), base)?
        * table[p]
        / qpochhammer_finite(q, base, l);
    let mut descending = Vec::with_capacity(l);
    let mut ascending = Vec::with_capacity(l);
    for m in 1..=l {
        let rk = addition_krawtchouk(l, m, a.c, a.d, base)?;
        let qm = QParam::q_power(m as i64);
        if m <= p {
            let coef = descending_coefficient(l, m, p, a.d, base);
            let little = little_q_jacobi(l - m, base.pow((p - m) as i64), qm, qm, base)?;
            descending.push(coef * rk * little * table[p - m]);
        } else {
            descending.push(R::zero());
        }
        let coef = ascending_coefficient(l, m, a.c, base);
        let little = little_q_jacobi(l - m, qp, qm, qm, base)?;
        ascending.push(coef * rk * little * table[p + m]);
    }
    Ok(AdditionRhs {
        zero_term,
        descending,
        ascending,
    })
}

pub fn verify_addition<R: Real>(a: &AdditionParams<R>, tolerance: f64) -> Result<VerificationReport> {
    let lhs = addition_lhs(a)?;
    let rhs = addition_rhs(a)?.total();
    Ok(VerificationReport::compare(
        IdentityId::Addition,
        a.record(),
        lhs,
        rhs,
        tolerance,
        Truncation::for_real::<R>().series_terms(a.l + 1),
    ))
}

/// Runs [`verify_addition`] in the requested precision.
pub fn verify_addition_in(a: &AdditionParams<f64>, precision: Precision, tolerance: f64) -> Result<VerificationReport> {
    match precision {
        Precision::Double => verify_addition(a, tolerance),
        Precision::Extended => verify_addition(&a.convert::<DoubleDouble>(), tolerance),
    }
}

/// Both sides of the addition formula are polynomials of degree `l + p` in
/// `x`; fits their difference at `l + p + 1` Chebyshev nodes on
/// `[−d − 1, c + 1]` and compares its coefficients with those of the left
/// side.
pub fn addition_polynomiality<R: Real>(
    l: usize,
    p: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    tolerance: f64,
) -> Result<VerificationReport> {
    require_positive_cd(c, d)?;
    let deg = l + p;
    let lo = -d - R::one();
    let hi = c + R::one();
    let mut err = None;
    let mut eval = |x: R, diff: bool| -> R {
        let a = AdditionParams { l, p, x, c, d, base: *base };
        let r = addition_lhs(&a).and_then(|lhs| {
            if diff {
                Ok(lhs - addition_rhs(&a)?.total())
            } else {
                Ok(lhs)
            }
        });
        r.unwrap_or_else(|e| {
            err.get_or_insert(e);
            R::zero()
        })
    };
    let diff = NewtonPoly::sample(|x| eval(x, true), deg, lo, hi).monomial();
    let lhs = NewtonPoly::sample(|x| eval(x, false), deg, lo, hi).monomial();
    if let Some(e) = err {
        return Err(e);
    }
    let worst = diff.iter().map(|v| v.abs().to_f64()).fold(0.0, f64::max);
    let scale = lhs.iter().map(|v| v.abs().to_f64()).fold(0.0, f64::max);
    let rec = ParamRecord::new()
        .with("l", l)
        .with("p", p)
        .with("c", c.to_f64())
        .with("d", d.to_f64())
        .with("q", base.q().to_f64());
    Ok(VerificationReport::bound(
        IdentityId::AdditionPolynomiality,
        rec,
        worst,
        0.0,
        worst / scale.max(f64::MIN_POSITIVE),
        1.0,
        tolerance,
        Truncation::for_real::<R>().series_terms(deg + 1),
    ))
}

/// Both sides of the `c = 1, d = 0` specialisation, in which the addition
/// formula becomes an identity for little q-Legendre polynomials.
pub fn special_case_little_sides<R: Real>(l: usize, p: usize, x: R, base: &QBase<R>) -> Result<(R, R)> {
    let q = base.q();
    let (li, pi) = (l as i64, p as i64);
    let lhs = little_q_jacobi(l, x, R::one(), R::one(), base)? * qpochhammer_finite(base.pow(1 - pi) * x, base, p);
    let mut rhs = CompensatedSum::new();
    for m in 0..=l {
        let mi = m as i64;
        let qm = QParam::q_power(mi);
        let coef = base.pow(mi * (mi - li + pi)) * qpochhammer_finite(q, base, l + m)
            / (qpochhammer_finite(q, base, l - m) * qpochhammer_finite(q, base, m).powi(2));
        let little = little_q_jacobi(l - m, base.pow(pi), qm, qm, base)?;
        let poch = qpochhammer_finite(base.pow(1 - pi - mi) * x, base, p + m);
        rhs.add(coef * little * poch);
    }
    Ok((lhs, rhs.value()))
}

pub fn special_case_little<R: Real>(
    l: usize,
    p: usize,
    x: R,
    base: &QBase<R>,
    tolerance: f64,
) -> Result<VerificationReport> {
    let (lhs, rhs) = special_case_little_sides(l, p, x, base)?;
    let rec = ParamRecord::new()
        .with("l", l)
        .with("p", p)
        .with("x", x.to_f64())
        .with("q", base.q().to_f64());
    Ok(VerificationReport::compare(
        IdentityId::SpecialCaseLittle,
        rec,
        lhs,
        rhs,
        tolerance,
        Truncation::for_real::<R>().series_terms(l + 1),
    ))
}

/// `R_{l−m}(…; c/d, 2l; q) p_{l−m}(q^p; q^m, q^m; q)`, the left side of the
/// product formula.
pub fn product_lhs<R: Real>(l: usize, m: usize, p: usize, c: R, d: R, base: &QBase<R>) -> Result<R> {
    let qm = QParam::q_power(m as i64);
    Ok(addition_krawtchouk(l, m, c, d, base)? * little_q_jacobi(l - m, base.pow(p as i64), qm, qm, base)?)
}

/// The constant in front of the q-integral in the product formula.
pub fn product_constant<R: Real>(l: usize, m: usize, p: usize, c: R, d: R, base: &QBase<R>) -> Result<R> {
    let q = base.q();
    let (li, mi, pi) = (l as i64, m as i64, p as i64);
    let exp = -li * (li + 1) / 2 - pi * (pi - 1) / 2 + mi * (li - pi - mi);
    let num = R::sign_pow(li + mi)
        * base.pow(exp)
        * c.powi(-(p as i32))
        * d.powi(-((p + m) as i32))
        * qpochhammer_finite(-q * d / c, base, l)
        * qpochhammer_finite(q, base, l - m);
    let den = (R::one() - q)
        * c
        * qpochhammer_finite(base.pow(li + 1), base, l)
        * qpochhammer_finite(base.pow(mi + 1), base, p)
        * big00_constant(c, d, base)?;
    Ok(num / den)
}

fn product_record<R: Real>(l: usize, m: usize, p: usize, c: R, d: R, base: &QBase<R>) -> ParamRecord {
    ParamRecord::new()
        .with("l", l)
        .with("m", m)
        .with("p", p)
        .with("c", c.to_f64())
        .with("d", d.to_f64())
        .with("q", base.q().to_f64())
}

fn check_product_args<R: Real>(l: usize, m: usize, c: R, d: R) -> Result<()> {
    require_positive_cd(c, d)?;
    if m > l {
        return Err(Error::invalid(format!("m = {m} must lie in 0..={l}")));
    }
    Ok(())
}

/// `scale · ∫ P_l P̂_p P̂_{other} w d_qx` over `[−d, c]`. The constant is
/// folded into the integrand so that the tail bound applies to the value
/// that is compared.
#[allow(clippy::too_many_arguments)]
fn product_integral<R: Real>(
    l: usize,
    p: usize,
    other: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    scale: R,
    tail_bound: f64,
) -> Result<(R, usize)> {
    let top = p.max(other);
    let (v, terms) = weighted_integrals(top, c, d, base, tail_bound, 1, |x, t, out| {
        out[0] = scale * big_q_legendre(l, x, c, d, base)? * t[p] * t[other];
        Ok(())
    })?;
    Ok((v[0], terms))
}

/// Product formula obtained by integrating the addition formula against
/// `P̂_{p+m}`.
#[allow(clippy::too_many_arguments)]
pub fn product_formula<R: Real>(
    l: usize,
    m: usize,
    p: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    tail_bound: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_product_args(l, m, c, d)?;
    let lhs = product_lhs(l, m, p, c, d, base)?;
    let k = product_constant(l, m, p, c, d, base)?;
    let (rhs, terms) = product_integral(l, p, p + m, c, d, base, k, tail_bound)?;
    Ok(VerificationReport::compare(
        IdentityId::ProductFormula,
        product_record(l, m, p, c, d, base),
        lhs,
        rhs,
        tolerance,
        Truncation::for_real::<R>().integral_terms(terms).tail_bound(tail_bound),
    ))
}

/// The same product formula reached by integrating against `P̂_{p−m}`
/// (requires `p ≥ m`). The integral isolates the descending term, so the
/// result is the product formula at degree `p − m`.
#[allow(clippy::too_many_arguments)]
pub fn product_formula_descending<R: Real>(
    l: usize,
    m: usize,
    p: usize,
    c: R,
    d: R,
    base: &QBase<R>,
    tail_bound: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_product_args(l, m, c, d)?;
    if p < m {
        return Err(Error::invalid(format!("descending product formula needs p ≥ m, got p = {p}, m = {m}")));
    }
    let lhs = product_lhs(l, m, p - m, c, d, base)?;
    let coef = if m == 0 {
        R::one() / qpochhammer_finite(base.q(), base, l)
    } else {
        descending_coefficient(l, m, p, d, base)
    };
    let k = addition_lhs_factor(l, c, d, base) / (coef * big00_norm(p - m, c, d, base)?);
    let (rhs, terms) = product_integral(l, p, p - m, c, d, base, k, tail_bound)?;
    Ok(VerificationReport::compare(
        IdentityId::ProductFormulaDescending,
        product_record(l, m, p, c, d, base),
        lhs,
        rhs,
        tolerance,
        Truncation::for_real::<R>().integral_terms(terms).tail_bound(tail_bound),
    ))
}
